//! Emoji and emoticon substitution.
//!
//! Emoji are single Unicode scalars looked up in an [`EmojiTable`] and
//! replaced by their uppercase character name (`U+1F620` becomes
//! `ANGRY FACE`). Emoticons are ASCII glyph runs such as `:-)` looked up in
//! an [`EmoticonLexicon`]. Multi-scalar sequences are handled one scalar at
//! a time; zero-width joiners and variation selectors that trail a replaced
//! scalar are dropped.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::text::squeeze_whitespace;

/// Lower bound on the size of a usable emoji table.
pub const MIN_EMOJI_ENTRIES: usize = 842;

const BUILTIN_EMOJI: &str = include_str!("../data/emoji_table.tsv");
const BUILTIN_EMOTICONS: &str = include_str!("../data/emoticons.tsv");

const ZWJ: char = '\u{200D}';

fn is_joiner(c: char) -> bool {
    matches!(c, ZWJ | '\u{FE0E}' | '\u{FE0F}')
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TableError {
    #[error("line {line}: expected `key<TAB>NAME`")]
    MissingTab { line: usize },
    #[error("line {line}: invalid codepoint {text:?}")]
    BadCodepoint { line: usize, text: String },
    #[error("line {line}: name {name:?} must be uppercase A-Z, digits, spaces or hyphens")]
    BadName { line: usize, name: String },
    #[error("line {line}: duplicate key {key:?}")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: key {key:?} is not allowed in this table")]
    BadKey { line: usize, key: String },
    #[error("name {name:?} contains table key {key:?}, replacement would not be idempotent")]
    NameContainsKey { name: String, key: String },
    #[error("table has {found} entries, at least {required} required")]
    TooFewEntries { found: usize, required: usize },
}

fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && name.starts_with(|c: char| c.is_ascii_uppercase() || c.is_ascii_digit())
        && name.chars().all(|c| c.is_ascii_uppercase() || c.is_ascii_digit() || c == ' ' || c == '-')
}

/// Non-blank, non-comment lines with their 1-based line numbers.
fn records(src: &str) -> impl Iterator<Item = (usize, &str)> {
    src.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
}

/// Value of the first `# version: X` comment.
fn version_of(src: &str) -> Option<String> {
    src.lines()
        .filter_map(|l| l.strip_prefix('#'))
        .find_map(|l| l.trim().strip_prefix("version:"))
        .map(|v| v.trim().to_string())
}

/// Emoji scalar to name mapping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmojiTable {
    entries: BTreeMap<char, String>,
    version: String,
}

impl EmojiTable {
    /// The table shipped with the crate (UCD names for emoji scalars).
    pub fn builtin() -> Self {
        Self::parse(BUILTIN_EMOJI).expect("builtin emoji table is valid")
    }

    /// Parses `codepoint_hex<TAB>NAME` records and enforces
    /// [`MIN_EMOJI_ENTRIES`].
    pub fn parse(src: &str) -> Result<Self, TableError> {
        let mut entries = BTreeMap::new();
        for (line, rec) in records(src) {
            let (hex, name) = rec.split_once('\t').ok_or(TableError::MissingTab { line })?;
            let hex = hex.trim();
            let hex = hex.strip_prefix("U+").unwrap_or(hex);
            let c = u32::from_str_radix(hex, 16)
                .ok()
                .and_then(char::from_u32)
                .ok_or_else(|| TableError::BadCodepoint { line, text: hex.to_string() })?;
            if entries.insert(c, name.trim().to_string()).is_some() {
                return Err(TableError::DuplicateKey { line, key: c.to_string() });
            }
        }
        let version = version_of(src).unwrap_or_default();
        let table = Self::from_entries(entries, version)?;
        if table.len() < MIN_EMOJI_ENTRIES {
            return Err(TableError::TooFewEntries { found: table.len(), required: MIN_EMOJI_ENTRIES });
        }
        Ok(table)
    }

    /// Builds a table without the size floor; names and keys are still
    /// validated. Useful for small fixtures.
    pub fn from_entries(
        entries: impl IntoIterator<Item = (char, String)>,
        version: impl Into<String>,
    ) -> Result<Self, TableError> {
        let entries: BTreeMap<char, String> = entries.into_iter().collect();
        for (i, (&c, name)) in entries.iter().enumerate() {
            if c.is_ascii() || c.is_whitespace() || is_joiner(c) {
                return Err(TableError::BadKey { line: i + 1, key: c.to_string() });
            }
            if !valid_name(name) {
                return Err(TableError::BadName { line: i + 1, name: name.clone() });
            }
        }
        for name in entries.values() {
            if let Some(c) = name.chars().find(|c| entries.contains_key(c)) {
                return Err(TableError::NameContainsKey { name: name.clone(), key: c.to_string() });
            }
        }
        Ok(EmojiTable { entries, version: version.into() })
    }

    pub fn get(&self, c: char) -> Option<&str> {
        self.entries.get(&c).map(String::as_str)
    }

    pub fn contains(&self, c: char) -> bool {
        self.entries.contains_key(&c)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn iter(&self) -> impl Iterator<Item = (char, &str)> {
        self.entries.iter().map(|(&c, n)| (c, n.as_str()))
    }
}

/// ASCII emoticon to name mapping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmoticonLexicon {
    entries: BTreeMap<String, String>,
    version: String,
}

impl EmoticonLexicon {
    pub const MIN_KEY_LEN: usize = 2;
    pub const MAX_KEY_LEN: usize = 5;

    pub fn builtin() -> Self {
        Self::parse(BUILTIN_EMOTICONS).expect("builtin emoticon lexicon is valid")
    }

    /// Parses `glyphs<TAB>NAME` records.
    pub fn parse(src: &str) -> Result<Self, TableError> {
        let mut entries = Vec::new();
        for (line, rec) in records(src) {
            let (glyphs, name) = rec.split_once('\t').ok_or(TableError::MissingTab { line })?;
            entries.push((line, glyphs.to_string(), name.trim().to_string()));
        }
        Self::build(entries, version_of(src).unwrap_or_default())
    }

    pub fn from_entries(
        entries: impl IntoIterator<Item = (String, String)>,
        version: impl Into<String>,
    ) -> Result<Self, TableError> {
        let numbered = entries.into_iter().enumerate().map(|(i, (k, v))| (i + 1, k, v)).collect();
        Self::build(numbered, version.into())
    }

    fn build(entries: Vec<(usize, String, String)>, version: String) -> Result<Self, TableError> {
        let mut map = BTreeMap::new();
        for (line, key, name) in entries {
            let len = key.len();
            if !key.is_ascii()
                || key.chars().any(|c| c.is_whitespace() || c.is_control())
                || !(Self::MIN_KEY_LEN..=Self::MAX_KEY_LEN).contains(&len)
            {
                return Err(TableError::BadKey { line, key });
            }
            if !valid_name(&name) {
                return Err(TableError::BadName { line, name });
            }
            if map.contains_key(&key) {
                return Err(TableError::DuplicateKey { line, key });
            }
            map.insert(key, name);
        }
        for name in map.values() {
            if let Some(word) = name.split(' ').find(|w| map.contains_key(*w)) {
                return Err(TableError::NameContainsKey { name: name.clone(), key: word.to_string() });
            }
        }
        Ok(EmoticonLexicon { entries: map, version })
    }

    pub fn get(&self, glyphs: &str) -> Option<&str> {
        self.entries.get(glyphs).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }
}

/// Output of a substitution pass.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SubstitutionResult {
    pub text: String,
    pub emoji_replaced: usize,
    pub emoticons_replaced: usize,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Action {
    Replace,
    Strip,
}

fn emoji_pass(text: &str, table: &EmojiTable, action: Action) -> SubstitutionResult {
    let mut out = String::with_capacity(text.len() + 16);
    let mut count = 0;
    let mut touched = false;
    let mut after_emoji = false;
    for c in text.chars() {
        if let Some(name) = table.get(c) {
            if action == Action::Replace {
                out.push(' ');
                out.push_str(name);
                out.push(' ');
            } else {
                out.push(' ');
            }
            count += 1;
            after_emoji = true;
        } else if after_emoji && is_joiner(c) {
            touched = true;
        } else {
            out.push(c);
            after_emoji = false;
        }
    }
    if count == 0 && !touched {
        return SubstitutionResult { text: text.to_string(), ..Default::default() };
    }
    SubstitutionResult { text: squeeze_whitespace(&out), emoji_replaced: count, emoticons_replaced: 0 }
}

/// Replaces every table scalar by ` NAME `, then collapses whitespace.
///
/// Text without table scalars is returned untouched.
pub fn replace_emojis(text: &str, table: &EmojiTable) -> SubstitutionResult {
    emoji_pass(text, table, Action::Replace)
}

/// Deletes every table scalar; `emoji_replaced` counts the deletions.
pub fn strip_emojis(text: &str, table: &EmojiTable) -> SubstitutionResult {
    emoji_pass(text, table, Action::Strip)
}

fn emoticon_pass(text: &str, lexicon: &EmoticonLexicon, action: Action) -> SubstitutionResult {
    // Candidates are maximal runs of printable ASCII. Whitespace and
    // non-ASCII scalars both delimit, so emoji next to an emoticon do not
    // hide it and the emoji pass can run before or after this one.
    let is_glyph = |c: char| c.is_ascii_graphic();
    let mut out = String::with_capacity(text.len() + 16);
    let mut count = 0;
    let mut rest = text;
    while !rest.is_empty() {
        let gap = rest.find(is_glyph).unwrap_or(rest.len());
        out.push_str(&rest[..gap]);
        rest = &rest[gap..];
        let end = rest.find(|c: char| !is_glyph(c)).unwrap_or(rest.len());
        let token = &rest[..end];
        match lexicon.get(token) {
            Some(name) => {
                out.push(' ');
                if action == Action::Replace {
                    out.push_str(name);
                    out.push(' ');
                }
                count += 1;
            }
            None => out.push_str(token),
        }
        rest = &rest[end..];
    }
    if count == 0 {
        return SubstitutionResult { text: text.to_string(), ..Default::default() };
    }
    SubstitutionResult { text: squeeze_whitespace(&out), emoji_replaced: 0, emoticons_replaced: count }
}

/// Replaces emoticons delimited by whitespace, non-ASCII scalars or the
/// text ends with their lexicon name.
pub fn replace_emoticons(text: &str, lexicon: &EmoticonLexicon) -> SubstitutionResult {
    emoticon_pass(text, lexicon, Action::Replace)
}

/// Deletes isolated emoticons.
pub fn strip_emoticons(text: &str, lexicon: &EmoticonLexicon) -> SubstitutionResult {
    emoticon_pass(text, lexicon, Action::Strip)
}

/// Counts scalars in the main pictograph blocks that the table does not
/// cover; these pass through substitution unchanged.
pub fn count_unmapped_pictographs(text: &str, table: &EmojiTable) -> usize {
    text.chars().filter(|&c| matches!(c as u32, 0x1F000..=0x1FAFF | 0x2600..=0x27BF) && !table.contains(c)).count()
}
