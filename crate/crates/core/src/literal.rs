//! Python-style bytes literals (`b'...'`) and lossy UTF-8 decoding.
//!
//! Scraped tweets are stored on disk as the `repr` of a Python `bytes`
//! object, so emoji arrive as runs of `\xHH` escapes:
//!
//! ```
//! use polarity_core::literal::{decode_utf8, parse_bytes_literal};
//!
//! let bytes = parse_bytes_literal(r"b'go \xF0\x9F\x98\xA0'").unwrap();
//! let decoded = decode_utf8(bytes.as_bytes());
//! assert_eq!(decoded.text, "go \u{1F620}");
//! assert_eq!(decoded.replacement_count, 0);
//! ```

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

/// Raw bytes denoted by a bytes literal.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct ByteString(Vec<u8>);

impl ByteString {
    pub fn new(bytes: Vec<u8>) -> Self {
        ByteString(bytes)
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<u8> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<Vec<u8>> for ByteString {
    fn from(bytes: Vec<u8>) -> Self {
        ByteString(bytes)
    }
}

impl AsRef<[u8]> for ByteString {
    fn as_ref(&self) -> &[u8] {
        &self.0
    }
}

/// Why a bytes literal was rejected. Offsets are byte offsets into the input.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LiteralError {
    #[error("bytes literal must start with b' or b\"")]
    MissingPrefix,
    #[error("bytes literal is not closed by a matching quote")]
    MissingClosingQuote,
    #[error("unescaped quote at offset {0} inside bytes literal")]
    StrayQuote(usize),
    #[error("truncated \\x escape at offset {0}")]
    TruncatedHex(usize),
    #[error("invalid hex digits in \\x escape at offset {0}")]
    InvalidHex(usize),
    #[error("unknown escape sequence \\{ch} at offset {offset}")]
    UnknownEscape { offset: usize, ch: char },
    #[error("non-ASCII character {ch:?} at offset {offset} outside an escape")]
    NonAscii { offset: usize, ch: char },
}

/// Parses `b'...'` or `b"..."` into the bytes it denotes.
///
/// Recognized escapes are `\xHH`, `\\`, `\'`, `\"`, `\n`, `\r` and `\t`.
/// Any other escape, a stray unescaped closing quote, or a non-ASCII
/// character outside an escape is an error.
pub fn parse_bytes_literal(s: &str) -> Result<ByteString, LiteralError> {
    let rest = s.strip_prefix('b').ok_or(LiteralError::MissingPrefix)?;
    let quote = match rest.as_bytes().first() {
        Some(&q @ (b'\'' | b'"')) => q,
        _ => return Err(LiteralError::MissingPrefix),
    };
    let body = &rest.as_bytes()[1..];
    // offset of body[0] within s
    let base = 2;

    let mut out = Vec::with_capacity(body.len());
    let mut i = 0;
    let mut closed = false;
    while i < body.len() {
        let b = body[i];
        if b == quote {
            if i + 1 != body.len() {
                return Err(LiteralError::StrayQuote(base + i));
            }
            closed = true;
            break;
        }
        if b == b'\\' {
            let Some(&esc) = body.get(i + 1) else {
                return Err(LiteralError::MissingClosingQuote);
            };
            match esc {
                b'x' => {
                    let hex = body.get(i + 2..i + 4).ok_or(LiteralError::TruncatedHex(base + i))?;
                    // a closing quote inside the two digit slots means the escape was cut short
                    if hex.contains(&quote) {
                        return Err(LiteralError::TruncatedHex(base + i));
                    }
                    let hi = hex_value(hex[0]).ok_or(LiteralError::InvalidHex(base + i))?;
                    let lo = hex_value(hex[1]).ok_or(LiteralError::InvalidHex(base + i))?;
                    out.push(hi << 4 | lo);
                    i += 4;
                    continue;
                }
                b'\\' => out.push(b'\\'),
                b'\'' => out.push(b'\''),
                b'"' => out.push(b'"'),
                b'n' => out.push(b'\n'),
                b'r' => out.push(b'\r'),
                b't' => out.push(b'\t'),
                _ => {
                    let ch = s[base + i + 1..].chars().next().unwrap_or('\u{FFFD}');
                    return Err(LiteralError::UnknownEscape { offset: base + i, ch });
                }
            }
            i += 2;
            continue;
        }
        if !b.is_ascii() {
            let ch = s[base + i..].chars().next().unwrap_or('\u{FFFD}');
            return Err(LiteralError::NonAscii { offset: base + i, ch });
        }
        out.push(b);
        i += 1;
    }
    if !closed {
        return Err(LiteralError::MissingClosingQuote);
    }
    Ok(ByteString(out))
}

fn hex_value(b: u8) -> Option<u8> {
    match b {
        b'0'..=b'9' => Some(b - b'0'),
        b'a'..=b'f' => Some(b - b'a' + 10),
        b'A'..=b'F' => Some(b - b'A' + 10),
        _ => None,
    }
}

/// Canonical single-quoted rendering of `bytes`.
///
/// Printable ASCII other than `\` and `'` is written verbatim; `\n`, `\r`
/// and `\t` use their short escapes; every other byte becomes `\xHH` with
/// uppercase digits, matching the corpus convention.
pub fn escape_bytes_literal(bytes: &[u8]) -> String {
    let mut out = String::with_capacity(bytes.len() + 3);
    out.push_str("b'");
    for &b in bytes {
        match b {
            b'\\' => out.push_str("\\\\"),
            b'\'' => out.push_str("\\'"),
            b'\n' => out.push_str("\\n"),
            b'\r' => out.push_str("\\r"),
            b'\t' => out.push_str("\\t"),
            0x20..=0x7E => out.push(b as char),
            _ => {
                let _ = write!(out, "\\x{b:02X}");
            }
        }
    }
    out.push('\'');
    out
}

/// Text produced by [`decode_utf8`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DecodedText {
    pub text: String,
    /// U+FFFD characters inserted for malformed input. Replacement
    /// characters that were validly encoded in the input are not counted.
    pub replacement_count: usize,
}

/// Decodes UTF-8, replacing each maximal malformed subpart with one U+FFFD.
pub fn decode_utf8(bytes: &[u8]) -> DecodedText {
    let mut text = String::with_capacity(bytes.len());
    let mut replacement_count = 0;
    for chunk in bytes.utf8_chunks() {
        text.push_str(chunk.valid());
        if !chunk.invalid().is_empty() {
            text.push(char::REPLACEMENT_CHARACTER);
            replacement_count += 1;
        }
    }
    DecodedText { text, replacement_count }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn ascii_passthrough() {
        let b = parse_bytes_literal("b'RT hi'").unwrap();
        assert_eq!(b.as_bytes(), &[0x52, 0x54, 0x20, 0x68, 0x69]);
    }

    #[test]
    fn angry_face_escape() {
        let b = parse_bytes_literal(r"b'\xF0\x9F\x98\xA0'").unwrap();
        assert_eq!(b.as_bytes(), &[0xF0, 0x9F, 0x98, 0xA0]);
    }

    #[test]
    fn empty_literal() {
        assert!(parse_bytes_literal("b''").unwrap().is_empty());
        assert!(parse_bytes_literal("b\"\"").unwrap().is_empty());
    }

    #[test]
    fn non_hex_escape() {
        assert_eq!(parse_bytes_literal(r"b'\xZZ'"), Err(LiteralError::InvalidHex(2)));
    }

    #[test]
    fn simple_escapes() {
        let b = parse_bytes_literal(r#"b'a\\b\'c\"d\ne\rf\tg'"#).unwrap();
        assert_eq!(b.as_bytes(), b"a\\b'c\"d\ne\rf\tg");
        // the other quote kind needs no escape
        assert_eq!(parse_bytes_literal(r#"b"it's""#).unwrap().as_bytes(), b"it's");
        assert_eq!(parse_bytes_literal(r#"b'say "hi"'"#).unwrap().as_bytes(), b"say \"hi\"");
    }

    #[test]
    fn lowercase_hex_accepted() {
        assert_eq!(parse_bytes_literal(r"b'\xf0\x9f'").unwrap().as_bytes(), &[0xF0, 0x9F]);
    }

    #[test]
    fn malformed_literals() {
        assert_eq!(parse_bytes_literal("'hi'"), Err(LiteralError::MissingPrefix));
        assert_eq!(parse_bytes_literal("bhi"), Err(LiteralError::MissingPrefix));
        assert_eq!(parse_bytes_literal("b"), Err(LiteralError::MissingPrefix));
        assert_eq!(parse_bytes_literal("b'hi"), Err(LiteralError::MissingClosingQuote));
        assert_eq!(parse_bytes_literal("b'hi\""), Err(LiteralError::MissingClosingQuote));
        assert_eq!(parse_bytes_literal(r"b'hi\'"), Err(LiteralError::MissingClosingQuote));
        assert_eq!(parse_bytes_literal("b'a'b'"), Err(LiteralError::StrayQuote(3)));
        assert_eq!(parse_bytes_literal(r"b'\x4'"), Err(LiteralError::TruncatedHex(2)));
        assert_eq!(parse_bytes_literal(r"b'\x"), Err(LiteralError::TruncatedHex(2)));
        assert_eq!(parse_bytes_literal(r"b'\q'"), Err(LiteralError::UnknownEscape { offset: 2, ch: 'q' }));
        assert_eq!(parse_bytes_literal("b'caf\u{e9}'"), Err(LiteralError::NonAscii { offset: 5, ch: '\u{e9}' }));
    }

    #[test]
    fn escape_is_canonical() {
        let bytes = vec![b'a', b'\'', b'\\', 0x00, 0x7F, 0xF0, b'\n'];
        let lit = escape_bytes_literal(&bytes);
        assert_eq!(lit, r"b'a\'\\\x00\x7F\xF0\n'");
        assert_eq!(parse_bytes_literal(&lit).unwrap().as_bytes(), &bytes[..]);
    }

    #[test]
    fn decode_winking_face() {
        let d = decode_utf8(&[0xF0, 0x9F, 0x98, 0x89]);
        assert_eq!(d.text, "\u{1F609}");
        assert_eq!(d.replacement_count, 0);
    }

    #[test]
    fn decode_ascii() {
        let d = decode_utf8(b"hi");
        assert_eq!(d.text, "hi");
        assert_eq!(d.replacement_count, 0);
    }

    #[test]
    fn decode_maximal_subpart() {
        let d = decode_utf8(&[0xF0, 0x28]);
        assert_eq!(d.text, "\u{FFFD}(");
        assert_eq!(d.replacement_count, 1);

        // truncated 4-byte sequence is one maximal subpart
        let d = decode_utf8(&[0xF0, 0x9F, 0x98, b'x']);
        assert_eq!(d.text, "\u{FFFD}x");
        assert_eq!(d.replacement_count, 1);

        // surrogate encodings: ED is rejected alone, each trailing byte separately
        let d = decode_utf8(&[0xED, 0xA0, 0x80]);
        assert_eq!(d.text, "\u{FFFD}\u{FFFD}\u{FFFD}");
        assert_eq!(d.replacement_count, 3);
    }

    #[test]
    fn existing_replacement_char_not_counted() {
        let d = decode_utf8("a\u{FFFD}b".as_bytes());
        assert_eq!(d.text, "a\u{FFFD}b");
        assert_eq!(d.replacement_count, 0);
    }
}
