use alloc::string::String;

/// Collapses every whitespace run to a single space and trims both ends.
pub fn squeeze_whitespace(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for word in text.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn squeezes_and_trims() {
        assert_eq!(squeeze_whitespace("  a \t b\n\nc  "), "a b c");
        assert_eq!(squeeze_whitespace("   "), "");
        assert_eq!(squeeze_whitespace(""), "");
    }
}
