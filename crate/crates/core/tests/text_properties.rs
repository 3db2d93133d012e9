mod support;

use polarity_core::cleaner::{normalize, strip_mentions, NormalizationConfig, SymbolMode};
use polarity_core::dataset::{Gender, RawRecord, RawText};
use polarity_core::emoji::{replace_emojis, replace_emoticons, EmojiTable, EmoticonLexicon};
use polarity_core::literal::{decode_utf8, escape_bytes_literal, parse_bytes_literal};
use proptest::prelude::*;
use std::sync::OnceLock;
use support::oracles::{quote_ascii, utf8_table_valid};

fn tables() -> &'static (EmojiTable, EmoticonLexicon) {
    static T: OnceLock<(EmojiTable, EmoticonLexicon)> = OnceLock::new();
    T.get_or_init(|| (EmojiTable::builtin(), EmoticonLexicon::builtin()))
}

/// Tweet-like text: words, mentions, emoticons, mapped and unmapped emoji,
/// joiners and odd spacing.
fn tweetish() -> impl Strategy<Value = String> {
    let piece = prop_oneof![
        "[a-z]{1,8}",
        "@[A-Za-z0-9_]{1,17}",
        "[a-z]{1,3}@[a-z]{1,4}",
        Just(":)".to_string()),
        Just(":-(".to_string()),
        Just("<3".to_string()),
        Just("1:2".to_string()),
        Just("\u{1F609}".to_string()),
        Just("\u{1F620}\u{1F622}".to_string()),
        Just("\u{1F468}\u{200D}\u{1F469}".to_string()),
        Just("\u{2764}\u{FE0F}".to_string()),
        Just("\u{1FAE8}".to_string()),
        Just("caf\u{e9}".to_string()),
    ];
    prop::collection::vec((piece, prop_oneof![Just(" "), Just("  "), Just(""), Just("\t")]), 0..12)
        .prop_map(|parts| parts.into_iter().map(|(p, sep)| p + sep).collect())
}

fn all_configs() -> Vec<NormalizationConfig> {
    let modes = [SymbolMode::ReplaceWithText, SymbolMode::Strip, SymbolMode::KeepRaw];
    let mut out = Vec::new();
    for strip_mentions in [false, true] {
        for emoji_mode in modes {
            for emoticon_mode in modes {
                out.push(NormalizationConfig { strip_mentions, emoji_mode, emoticon_mode, drop_retweets: true });
            }
        }
    }
    out
}

fn plain(text: &str) -> RawRecord {
    RawRecord { id: 1, account: "a".into(), gender: Gender::Male, text: RawText::Plain(text.into()) }
}

fn literal(text: &str) -> RawRecord {
    RawRecord {
        id: 1,
        account: "a".into(),
        gender: Gender::Male,
        text: RawText::Literal(escape_bytes_literal(text.as_bytes())),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn ascii_round_trip(s in "[ -~]{0,60}") {
        let bytes = parse_bytes_literal(&quote_ascii(&s)).unwrap();
        let decoded = decode_utf8(bytes.as_bytes());
        prop_assert_eq!(decoded.text, s);
        prop_assert_eq!(decoded.replacement_count, 0);
    }

    #[test]
    fn canonical_escape_reparses(bytes in prop::collection::vec(any::<u8>(), 0..64)) {
        let lit = escape_bytes_literal(&bytes);
        prop_assert_eq!(parse_bytes_literal(&lit).unwrap().into_vec(), bytes);
    }

    #[test]
    fn decoding_is_total_and_counted(bytes in prop::collection::vec(any::<u8>(), 0..40)) {
        let d = decode_utf8(&bytes);
        prop_assert!(d.text.chars().count() <= bytes.len());
        prop_assert_eq!(d.replacement_count == 0, utf8_table_valid(&bytes));
    }

    #[test]
    fn emoji_replacement_is_idempotent(text in tweetish()) {
        let (table, _) = tables();
        let once = replace_emojis(&text, table);
        prop_assert_eq!(replace_emojis(&once.text, table).emoji_replaced, 0);
        prop_assert!(once.text.chars().all(|c| !table.contains(c)));
    }

    #[test]
    fn emoji_count_is_conserved(text in tweetish()) {
        let (table, _) = tables();
        let keys = text.chars().filter(|c| table.contains(*c)).count();
        prop_assert_eq!(replace_emojis(&text, table).emoji_replaced, keys);
    }

    #[test]
    fn untouched_scalars_keep_their_order(text in tweetish()) {
        let (table, _) = tables();
        let out = replace_emojis(&text, table).text;
        let kept: Vec<char> = text.chars().filter(|c| !table.contains(*c) && !c.is_whitespace()).collect();
        // names only add ASCII letters and spaces; drop them and the kept
        // characters must still appear in order
        let mut it = out.chars();
        for c in kept.iter().filter(|c| !matches!(c, '\u{200D}' | '\u{FE0F}')) {
            prop_assert!(it.any(|o| o == *c), "{:?} lost from {:?}", c, out);
        }
    }

    #[test]
    fn emoticon_replacement_is_idempotent(text in tweetish()) {
        let (_, lex) = tables();
        let once = replace_emoticons(&text, lex);
        prop_assert_eq!(replace_emoticons(&once.text, lex).emoticons_replaced, 0);
    }

    #[test]
    fn emoji_and_emoticon_passes_commute(text in tweetish()) {
        let (table, lex) = tables();
        let a = replace_emoticons(&replace_emojis(&text, table).text, lex).text;
        let b = replace_emojis(&replace_emoticons(&text, lex).text, table).text;
        prop_assert_eq!(
            a.split_whitespace().collect::<Vec<_>>(),
            b.split_whitespace().collect::<Vec<_>>()
        );
    }

    #[test]
    fn mention_stripping_is_idempotent(text in tweetish()) {
        let (once, _) = strip_mentions(&text);
        prop_assert_eq!(strip_mentions(&once).1, 0);
    }

    #[test]
    fn normalization_is_idempotent(text in tweetish()) {
        let (table, lex) = tables();
        for cfg in all_configs() {
            if let Some(out) = normalize(&literal(&text), &cfg, table, lex).unwrap().kept() {
                let again = normalize(&plain(&out.text), &cfg, table, lex).unwrap().kept();
                prop_assert_eq!(again.map(|t| t.text), Some(out.text.clone()), "config {:?}", cfg);
            }
        }
    }

    #[test]
    fn stripping_never_lengthens(text in tweetish()) {
        let (table, lex) = tables();
        let cfg = NormalizationConfig::grid_cell(true, SymbolMode::Strip);
        if let Some(out) = normalize(&plain(&text), &cfg, table, lex).unwrap().kept() {
            prop_assert!(out.text.chars().count() <= text.chars().count());
        }
    }

    #[test]
    fn mention_and_emoji_counts_are_independent(text in tweetish()) {
        let (table, lex) = tables();
        for mode in [SymbolMode::ReplaceWithText, SymbolMode::Strip] {
            let with = normalize(&plain(&text), &NormalizationConfig::grid_cell(true, mode), table, lex).unwrap();
            let without = normalize(&plain(&text), &NormalizationConfig::grid_cell(false, mode), table, lex).unwrap();
            if let (Some(a), Some(b)) = (with.kept(), without.kept()) {
                prop_assert_eq!(a.stats.emoji_replaced, b.stats.emoji_replaced);
            }
        }
        let replace = normalize(&plain(&text), &NormalizationConfig::grid_cell(true, SymbolMode::ReplaceWithText), table, lex).unwrap();
        let keep = normalize(&plain(&text), &NormalizationConfig::grid_cell(true, SymbolMode::KeepRaw), table, lex).unwrap();
        if let (Some(a), Some(b)) = (replace.kept(), keep.kept()) {
            prop_assert_eq!(a.stats.mentions_stripped, b.stats.mentions_stripped);
        }
    }
}

#[test]
fn table_rows_substitute_verbatim() {
    let (table, _) = tables();
    for (code, name) in [
        (r"b'\xF0\x9F\x98\xA0'", "ANGRY FACE"),
        (r"b'\xF0\x9F\x98\x89'", "WINKING FACE"),
        (r"b'\xF0\x9F\x98\xA2'", "CRYING FACE"),
        (r"b'\xF0\x9F\x98\xAB'", "TIRED FACE"),
        (r"b'\xF0\x9F\x98\xB5'", "DIZZY FACE"),
    ] {
        let text = decode_utf8(parse_bytes_literal(code).unwrap().as_bytes()).text;
        assert_eq!(replace_emojis(&text, table).text, name);
    }
}

#[test]
fn oracle_agrees_with_known_sequences() {
    assert!(utf8_table_valid(b""));
    assert!(utf8_table_valid("h\u{e9}\u{20AC}\u{1F609}".as_bytes()));
    assert!(!utf8_table_valid(&[0xC0, 0x80]));
    assert!(!utf8_table_valid(&[0xED, 0xA0, 0x80]));
    assert!(!utf8_table_valid(&[0xF4, 0x90, 0x80, 0x80]));
    assert!(!utf8_table_valid(&[0xF0, 0x9F, 0x98]));
    assert!(!utf8_table_valid(&[0x80]));
}
