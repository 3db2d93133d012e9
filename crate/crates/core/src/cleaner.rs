//! Retweet filtering, mention stripping and the normalization pipeline.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::dataset::{Gender, RawRecord, RawText};
use crate::emoji::{self, EmojiTable, EmoticonLexicon, SubstitutionResult};
use crate::literal::{decode_utf8, parse_bytes_literal, LiteralError};
use crate::text::squeeze_whitespace;

/// Longest handle accepted after `@`.
pub const MAX_HANDLE_LEN: usize = 15;

/// What to do with emoji or emoticons.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SymbolMode {
    ReplaceWithText,
    Strip,
    KeepRaw,
}

impl SymbolMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SymbolMode::ReplaceWithText => "replace",
            SymbolMode::Strip => "strip",
            SymbolMode::KeepRaw => "keep",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "replace" | "replace_with_text" => Some(SymbolMode::ReplaceWithText),
            "strip" => Some(SymbolMode::Strip),
            "keep" | "keep_raw" => Some(SymbolMode::KeepRaw),
            _ => None,
        }
    }
}

impl fmt::Display for SymbolMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NormalizationConfig {
    pub strip_mentions: bool,
    pub emoji_mode: SymbolMode,
    pub emoticon_mode: SymbolMode,
    pub drop_retweets: bool,
}

impl Default for NormalizationConfig {
    fn default() -> Self {
        NormalizationConfig {
            strip_mentions: false,
            emoji_mode: SymbolMode::ReplaceWithText,
            emoticon_mode: SymbolMode::ReplaceWithText,
            drop_retweets: true,
        }
    }
}

impl NormalizationConfig {
    /// One cell of the mention × emoji grid; emoticons follow the emoji mode.
    pub fn grid_cell(strip_mentions: bool, emoji_mode: SymbolMode) -> Self {
        NormalizationConfig { strip_mentions, emoji_mode, emoticon_mode: emoji_mode, drop_retweets: true }
    }

    /// Stable textual form, used for digests and report headers.
    pub fn canonical(&self) -> String {
        format!(
            "strip_mentions={};emoji_mode={};emoticon_mode={};drop_retweets={}",
            self.strip_mentions, self.emoji_mode, self.emoticon_mode, self.drop_retweets
        )
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TweetStats {
    pub emoji_replaced: usize,
    pub emoticons_replaced: usize,
    pub mentions_stripped: usize,
    /// Malformed UTF-8 runs replaced while decoding.
    pub decode_replacements: usize,
    /// Pictographs left in the output because the table has no name for them.
    pub unmapped_emoji: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizedTweet {
    pub id: u64,
    pub account: String,
    pub gender: Gender,
    pub text: String,
    pub stats: TweetStats,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Normalized {
    Kept(NormalizedTweet),
    DroppedRetweet,
    DroppedEmpty,
}

impl Normalized {
    pub fn kept(self) -> Option<NormalizedTweet> {
        match self {
            Normalized::Kept(t) => Some(t),
            _ => None,
        }
    }
}

/// `RT` followed by a space or `@`, case-sensitive.
pub fn is_retweet(text: &str) -> bool {
    text.strip_prefix("RT").is_some_and(|rest| rest.starts_with([' ', '@']))
}

fn is_handle_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Removes `@handle` mentions and returns the text with the number removed.
///
/// A mention is `@` followed by 1 to 15 of `[A-Za-z0-9_]` and then a
/// non-handle character or the end. The `@` must open the text or follow a
/// non-alphanumeric character of the output built so far, so `a@b.com` is
/// kept and `@a@b` loses both handles.
pub fn strip_mentions(text: &str) -> (String, usize) {
    let mut out = String::with_capacity(text.len());
    let mut count = 0;
    let mut rest = text;
    while let Some(c) = rest.chars().next() {
        if c == '@' && !out.chars().next_back().is_some_and(char::is_alphanumeric) {
            let after = &rest[1..];
            let len = after.find(|c: char| !is_handle_char(c)).unwrap_or(after.len());
            if (1..=MAX_HANDLE_LEN).contains(&len) {
                count += 1;
                rest = &after[len..];
                continue;
            }
        }
        out.push(c);
        rest = &rest[c.len_utf8()..];
    }
    if count == 0 {
        return (text.to_string(), 0);
    }
    (squeeze_whitespace(&out), count)
}

/// Decodes the stored text of a record.
pub fn decode_record_text(raw: &RawText) -> Result<(String, usize), LiteralError> {
    match raw {
        RawText::Plain(s) => Ok((s.clone(), 0)),
        RawText::Literal(s) => {
            let bytes = parse_bytes_literal(s)?;
            let decoded = decode_utf8(bytes.as_bytes());
            Ok((decoded.text, decoded.replacement_count))
        }
    }
}

/// Runs decode → retweet filter → mentions → emoji → emoticons → whitespace.
pub fn normalize(
    raw: &RawRecord,
    config: &NormalizationConfig,
    table: &EmojiTable,
    lexicon: &EmoticonLexicon,
) -> Result<Normalized, LiteralError> {
    let (text, decode_replacements) = decode_record_text(&raw.text)?;
    if config.drop_retweets && is_retweet(&text) {
        return Ok(Normalized::DroppedRetweet);
    }
    let mut stats = TweetStats { decode_replacements, ..Default::default() };

    let text = if config.strip_mentions {
        let (t, n) = strip_mentions(&text);
        stats.mentions_stripped = n;
        t
    } else {
        text
    };

    let text = match config.emoji_mode {
        SymbolMode::KeepRaw => text,
        mode => {
            let SubstitutionResult { text, emoji_replaced, .. } = if mode == SymbolMode::Strip {
                emoji::strip_emojis(&text, table)
            } else {
                emoji::replace_emojis(&text, table)
            };
            stats.emoji_replaced = emoji_replaced;
            text
        }
    };

    let text = match config.emoticon_mode {
        SymbolMode::KeepRaw => text,
        mode => {
            let SubstitutionResult { text, emoticons_replaced, .. } = if mode == SymbolMode::Strip {
                emoji::strip_emoticons(&text, lexicon)
            } else {
                emoji::replace_emoticons(&text, lexicon)
            };
            stats.emoticons_replaced = emoticons_replaced;
            text
        }
    };

    let text = squeeze_whitespace(&text);
    if text.is_empty() {
        return Ok(Normalized::DroppedEmpty);
    }
    stats.unmapped_emoji = emoji::count_unmapped_pictographs(&text, table);
    Ok(Normalized::Kept(NormalizedTweet { id: raw.id, account: raw.account.clone(), gender: raw.gender, text, stats }))
}

/// Normalized records plus drop accounting.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NormalizedBatch {
    pub tweets: Vec<NormalizedTweet>,
    pub dropped_retweets: Vec<u64>,
    pub dropped_empty: Vec<u64>,
}

impl NormalizedBatch {
    pub fn input_len(&self) -> usize {
        self.tweets.len() + self.dropped_retweets.len() + self.dropped_empty.len()
    }

    pub fn totals(&self) -> TweetStats {
        self.tweets.iter().fold(TweetStats::default(), |acc, t| TweetStats {
            emoji_replaced: acc.emoji_replaced + t.stats.emoji_replaced,
            emoticons_replaced: acc.emoticons_replaced + t.stats.emoticons_replaced,
            mentions_stripped: acc.mentions_stripped + t.stats.mentions_stripped,
            decode_replacements: acc.decode_replacements + t.stats.decode_replacements,
            unmapped_emoji: acc.unmapped_emoji + t.stats.unmapped_emoji,
        })
    }
}

/// Normalizes every record in order; the first malformed literal aborts.
pub fn normalize_all(
    records: &[RawRecord],
    config: &NormalizationConfig,
    table: &EmojiTable,
    lexicon: &EmoticonLexicon,
) -> Result<NormalizedBatch, (u64, LiteralError)> {
    let mut batch = NormalizedBatch::default();
    for raw in records {
        match normalize(raw, config, table, lexicon).map_err(|e| (raw.id, e))? {
            Normalized::Kept(t) => batch.tweets.push(t),
            Normalized::DroppedRetweet => batch.dropped_retweets.push(raw.id),
            Normalized::DroppedEmpty => batch.dropped_empty.push(raw.id),
        }
    }
    Ok(batch)
}
