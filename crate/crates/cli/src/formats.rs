//! Line-oriented file formats.
//!
//! Every format is UTF-8, one record per line, fields separated by tabs,
//! with `#` starting a comment or header line. Headers that carry data
//! have the form `# key: value`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use polarity_core::dataset::{Account, Career, Corpus, DatasetError, Gender, RawRecord, RawText, Split};
use sha2::{Digest, Sha256};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },
    #[error("{path}: {source}")]
    Dataset { path: PathBuf, source: DatasetError },
    #[error("{0}")]
    Unwritable(String),
}

pub fn read_text(path: &Path) -> Result<String, FormatError> {
    std::fs::read_to_string(path).map_err(|source| FormatError::Io { path: path.into(), source })
}

pub fn write_text(path: &Path, contents: &str) -> Result<(), FormatError> {
    let io = |source| FormatError::Io { path: path.into(), source };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(io)?;
    }
    std::fs::write(path, contents).map_err(io)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// `(line number, line)` for every non-blank line that is not a comment.
fn records(src: &str) -> impl Iterator<Item = (usize, &str)> {
    src.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
}

/// Value of the first `# key: value` header.
fn header<'a>(src: &'a str, key: &str) -> Option<&'a str> {
    src.lines().filter_map(|l| l.strip_prefix('#')).find_map(|l| {
        let (k, v) = l.split_once(':')?;
        (k.trim() == key).then(|| v.trim())
    })
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Parse { path: path.into(), line, msg: msg.into() }
}

/// How the text column of a corpus file is encoded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TextFormat {
    BytesLiteral,
    Plain,
    /// Per line: literal if it looks like `b'...'` or `b"..."`.
    Detect,
}

fn looks_literal(s: &str) -> bool {
    let b = s.as_bytes();
    b.len() >= 3 && b[0] == b'b' && matches!(b[1], b'\'' | b'"') && b[b.len() - 1] == b[1]
}

fn parse_gender(path: &Path, line: usize, s: &str) -> Result<Gender, FormatError> {
    Gender::parse(s).ok_or_else(|| parse_err(path, line, format!("unknown gender {s:?} (expected female or male)")))
}

fn parse_career(path: &Path, line: usize, s: &str) -> Result<Career, FormatError> {
    Career::parse(s).ok_or_else(|| parse_err(path, line, format!("unknown career {s:?}")))
}

/// Reads `account<TAB>gender<TAB>career<TAB>text` records. Ids are 0-based
/// record ordinals. Accounts come from `accounts` when given, otherwise
/// from the records themselves, which must then agree on each account's
/// gender and career. The corpus provenance is the file's SHA-256.
pub fn read_corpus(path: &Path, accounts: Option<&Path>) -> Result<Corpus, FormatError> {
    let bytes = std::fs::read(path).map_err(|source| FormatError::Io { path: path.into(), source })?;
    let src = String::from_utf8(bytes.clone()).map_err(|e| {
        let line = bytes[..e.utf8_error().valid_up_to()].iter().filter(|&&b| b == b'\n').count() + 1;
        parse_err(path, line, "file is not valid UTF-8")
    })?;
    let mut corpus = parse_corpus(path, &src, accounts.map(read_accounts).transpose()?)?;
    corpus.provenance = Some(sha256_hex(&bytes));
    Ok(corpus)
}

fn parse_corpus(path: &Path, src: &str, given: Option<Vec<Account>>) -> Result<Corpus, FormatError> {
    let format = match header(src, "format") {
        None => TextFormat::Detect,
        Some("bytes-literal") => TextFormat::BytesLiteral,
        Some("plain") => TextFormat::Plain,
        Some(other) => return Err(parse_err(path, 1, format!("unknown text format {other:?}"))),
    };
    let mut derived: Vec<Account> = Vec::new();
    let mut seen: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    let mut out = Vec::new();
    for (id, (line, l)) in records(src).enumerate() {
        let f: Vec<&str> = l.splitn(4, '\t').collect();
        if f.len() != 4 {
            return Err(parse_err(path, line, "expected account, gender, career and text separated by tabs"));
        }
        let gender = parse_gender(path, line, f[1])?;
        let career = parse_career(path, line, f[2])?;
        let text = match format {
            TextFormat::BytesLiteral => RawText::Literal(f[3].into()),
            TextFormat::Plain => RawText::Plain(f[3].into()),
            TextFormat::Detect if looks_literal(f[3]) => RawText::Literal(f[3].into()),
            TextFormat::Detect => RawText::Plain(f[3].into()),
        };
        if given.is_none() {
            match seen.get(f[0]) {
                None => {
                    seen.insert(f[0].into(), (line, derived.len()));
                    derived.push(Account { handle: f[0].into(), gender, career });
                }
                Some(&(first, idx)) => {
                    let a = &derived[idx];
                    if a.gender != gender || a.career != career {
                        return Err(parse_err(
                            path,
                            line,
                            format!("account {:?} disagrees with its first record on line {first}", f[0]),
                        ));
                    }
                }
            }
        }
        out.push(RawRecord { id: id as u64, account: f[0].into(), gender, text });
    }
    Corpus::new(given.unwrap_or(derived), out).map_err(|source| FormatError::Dataset { path: path.into(), source })
}

/// Reads `account<TAB>gender<TAB>career` records.
pub fn read_accounts(path: &Path) -> Result<Vec<Account>, FormatError> {
    let src = read_text(path)?;
    records(&src)
        .map(|(line, l)| {
            let f: Vec<&str> = l.split('\t').collect();
            if f.len() != 3 {
                return Err(parse_err(path, line, "expected account, gender and career separated by tabs"));
            }
            Ok(Account {
                handle: f[0].into(),
                gender: parse_gender(path, line, f[1])?,
                career: parse_career(path, line, f[2])?,
            })
        })
        .collect()
}

/// Writes a corpus that [`read_corpus`] reads back unchanged when its ids
/// are record ordinals, as they are for loaded and synthetic corpora.
/// Plain texts must not contain tabs or line breaks.
pub fn render_corpus(corpus: &Corpus) -> Result<String, FormatError> {
    let all_literal = corpus.records.iter().all(|r| matches!(r.text, RawText::Literal(_)));
    let all_plain = corpus.records.iter().all(|r| matches!(r.text, RawText::Plain(_)));
    let mut out = String::new();
    if all_literal {
        out.push_str("# format: bytes-literal\n");
    } else if all_plain {
        out.push_str("# format: plain\n");
    }
    let careers: BTreeMap<&str, Career> = corpus.accounts.iter().map(|a| (a.handle.as_str(), a.career)).collect();
    for r in &corpus.records {
        let text = match &r.text {
            RawText::Literal(s) | RawText::Plain(s) => s,
        };
        if text.contains(['\t', '\n', '\r']) || r.account.contains(['\t', '\n', '\r']) {
            return Err(FormatError::Unwritable(format!("record {} contains a tab or line break", r.id)));
        }
        if !all_literal && !all_plain && matches!(r.text, RawText::Plain(_)) && looks_literal(text) {
            return Err(FormatError::Unwritable(format!("plain record {} would read back as a bytes literal", r.id)));
        }
        let _ =
            writeln!(out, "{}\t{}\t{}\t{}", r.account, r.gender.as_str(), careers[r.account.as_str()].as_str(), text);
    }
    Ok(out)
}

pub fn render_accounts(accounts: &[Account]) -> String {
    let mut out = String::new();
    for a in accounts {
        let _ = writeln!(out, "{}\t{}\t{}", a.handle, a.gender.as_str(), a.career.as_str());
    }
    out
}

/// Audit fields written above the split records.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitFile {
    pub split: Split,
    pub requested_seed: u64,
    /// Seeds rejected by the balance check, in order.
    pub rejected: Vec<u64>,
}

/// `# seed`, `# val_fraction`, `# requested_seed`, `# retries` headers,
/// then `id<TAB>train|val` in split order, validation ids first.
pub fn render_split(file: &SplitFile) -> String {
    let s = &file.split;
    let mut out = String::new();
    let _ = writeln!(out, "# seed: {}", s.seed);
    let _ = writeln!(out, "# val_fraction: {:?}", s.val_fraction);
    let _ = writeln!(out, "# requested_seed: {}", file.requested_seed);
    let rejected: Vec<String> = file.rejected.iter().map(u64::to_string).collect();
    let _ = writeln!(out, "# retries: {}", file.rejected.len());
    if !rejected.is_empty() {
        let _ = writeln!(out, "# rejected_seeds: {}", rejected.join(","));
    }
    for id in &s.val {
        let _ = writeln!(out, "{id}\tval");
    }
    for id in &s.train {
        let _ = writeln!(out, "{id}\ttrain");
    }
    out
}

pub fn parse_split(path: &Path, src: &str) -> Result<SplitFile, FormatError> {
    let need = |key: &str| header(src, key).ok_or_else(|| parse_err(path, 1, format!("missing `# {key}:` header")));
    let num = |key: &str| -> Result<u64, FormatError> {
        need(key)?.parse().map_err(|_| parse_err(path, 1, format!("bad `# {key}:` header")))
    };
    let seed = num("seed")?;
    let requested_seed = num("requested_seed")?;
    let val_fraction: f64 =
        need("val_fraction")?.parse().map_err(|_| parse_err(path, 1, "bad `# val_fraction:` header"))?;
    let rejected = match header(src, "rejected_seeds") {
        None => Vec::new(),
        Some(v) => v
            .split(',')
            .map(|s| s.trim().parse().map_err(|_| parse_err(path, 1, "bad `# rejected_seeds:` header")))
            .collect::<Result<_, _>>()?,
    };
    let (mut train, mut val) = (Vec::new(), Vec::new());
    let mut ids = std::collections::BTreeSet::new();
    for (line, l) in records(src) {
        let (id, side) = l.split_once('\t').ok_or_else(|| parse_err(path, line, "expected id<TAB>train|val"))?;
        let id: u64 = id.parse().map_err(|_| parse_err(path, line, format!("bad id {id:?}")))?;
        if !ids.insert(id) {
            return Err(parse_err(path, line, format!("duplicate id {id}")));
        }
        match side {
            "train" => train.push(id),
            "val" => val.push(id),
            other => return Err(parse_err(path, line, format!("expected train or val, got {other:?}"))),
        }
    }
    Ok(SplitFile { split: Split { train, val, seed, val_fraction }, requested_seed, rejected })
}

/// One interchange record: `id<TAB>label<TAB>normalized_text`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Example {
    pub id: u64,
    pub label: u8,
    pub text: String,
}

pub fn render_examples<'a>(rows: impl IntoIterator<Item = &'a Example>) -> Result<String, FormatError> {
    let mut out = String::new();
    for e in rows {
        if e.text.contains(['\t', '\n', '\r']) {
            return Err(FormatError::Unwritable(format!("example {} contains a tab or line break", e.id)));
        }
        let _ = writeln!(out, "{}\t{}\t{}", e.id, e.label, e.text);
    }
    Ok(out)
}

pub fn parse_examples(path: &Path, src: &str) -> Result<Vec<Example>, FormatError> {
    records(src)
        .map(|(line, l)| {
            let f: Vec<&str> = l.splitn(3, '\t').collect();
            if f.len() != 3 {
                return Err(parse_err(path, line, "expected id<TAB>label<TAB>text"));
            }
            let id = f[0].parse().map_err(|_| parse_err(path, line, format!("bad id {:?}", f[0])))?;
            let label = match f[1] {
                "0" => 0,
                "1" => 1,
                other => return Err(parse_err(path, line, format!("label must be 0 or 1, got {other:?}"))),
            };
            Ok(Example { id, label, text: f[2].into() })
        })
        .collect()
}

/// `id<TAB>probability_female` records. Probabilities are written in
/// shortest round-trip form so re-reading gives the same bits.
pub fn render_predictions(rows: &[(u64, f64)]) -> String {
    let mut out = String::new();
    for (id, p) in rows {
        let _ = writeln!(out, "{id}\t{p:?}");
    }
    out
}

pub fn parse_predictions(path: &Path, src: &str) -> Result<BTreeMap<u64, f64>, FormatError> {
    let mut out = BTreeMap::new();
    for (line, l) in records(src) {
        let (id, p) = l.split_once('\t').ok_or_else(|| parse_err(path, line, "expected id<TAB>probability"))?;
        let id: u64 = id.parse().map_err(|_| parse_err(path, line, format!("bad id {id:?}")))?;
        let p: f64 = p.trim().parse().map_err(|_| parse_err(path, line, format!("bad probability {p:?}")))?;
        if !(0.0..=1.0).contains(&p) {
            return Err(parse_err(path, line, format!("probability {p} outside [0, 1]")));
        }
        if out.insert(id, p).is_some() {
            return Err(parse_err(path, line, format!("duplicate id {id}")));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> &'static Path {
        Path::new("mem")
    }

    #[test]
    fn corpus_detects_literals_per_line() {
        let src = "# a comment\nann\tfemale\tsinger\tb'hi \\xF0\\x9F\\x98\\x89'\nbob\tmale\tactor\tplain text\n";
        let c = parse_corpus(p(), src, None).unwrap();
        assert_eq!(c.records.len(), 2);
        assert!(matches!(c.records[0].text, RawText::Literal(_)));
        assert_eq!(c.records[1].text, RawText::Plain("plain text".into()));
        assert_eq!(c.records[1].id, 1);
        assert_eq!(c.accounts.len(), 2);
    }

    #[test]
    fn corpus_header_forces_plain() {
        let src = "# format: plain\nann\tfemale\tsinger\tb'hi'\n";
        let c = parse_corpus(p(), src, None).unwrap();
        assert_eq!(c.records[0].text, RawText::Plain("b'hi'".into()));
    }

    #[test]
    fn corpus_rejects_inconsistent_accounts() {
        let src = "ann\tfemale\tsinger\tx\nann\tmale\tsinger\ty\n";
        let err = parse_corpus(p(), src, None).unwrap_err();
        assert!(matches!(err, FormatError::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn corpus_rejects_short_lines_with_line_number() {
        let err = parse_corpus(p(), "\n\nann\tfemale\n", None).unwrap_err();
        assert!(matches!(err, FormatError::Parse { line: 3, .. }));
    }

    #[test]
    fn corpus_round_trips() {
        let src = "# format: bytes-literal\nann\tfemale\tsinger\tb'a'\nbob\tmale\tactor_actress\tb'b\\tc'\n";
        let c = parse_corpus(p(), src, None).unwrap();
        assert_eq!(render_corpus(&c).unwrap(), src);
    }

    #[test]
    fn split_round_trips() {
        let file = SplitFile {
            split: Split { train: vec![3, 1, 2], val: vec![0], seed: 44, val_fraction: 0.25 },
            requested_seed: 42,
            rejected: vec![42, 43],
        };
        let text = render_split(&file);
        assert!(text.starts_with("# seed: 44\n# val_fraction: 0.25\n# requested_seed: 42\n# retries: 2\n"));
        assert_eq!(parse_split(p(), &text).unwrap(), file);
    }

    #[test]
    fn predictions_round_trip_bitwise() {
        let rows = vec![(4, 0.1 + 0.2), (9, 1.0 / 3.0), (1, 5e-324)];
        let back = parse_predictions(p(), &render_predictions(&rows)).unwrap();
        for (id, v) in rows {
            assert_eq!(back[&id].to_bits(), v.to_bits());
        }
    }

    #[test]
    fn predictions_reject_out_of_range_and_duplicates() {
        assert!(parse_predictions(p(), "1\t1.5\n").is_err());
        assert!(parse_predictions(p(), "1\t0.5\n1\t0.4\n").is_err());
    }

    #[test]
    fn examples_round_trip() {
        let rows = vec![Example { id: 7, label: 1, text: "WINKING FACE hi".into() }];
        let text = render_examples(&rows).unwrap();
        assert_eq!(text, "7\t1\tWINKING FACE hi\n");
        assert_eq!(parse_examples(p(), &text).unwrap(), rows);
        assert!(parse_examples(p(), "7\t2\tx\n").is_err());
    }
}
