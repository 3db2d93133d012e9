//! Reference implementations used only by tests. None of these call into
//! the code paths they check.
#![allow(dead_code)]

/// Well-formedness per the table of valid UTF-8 byte sequences:
///
/// ```text
/// U+0000..U+007F     00..7F
/// U+0080..U+07FF     C2..DF 80..BF
/// U+0800..U+0FFF     E0     A0..BF 80..BF
/// U+1000..U+CFFF     E1..EC 80..BF 80..BF
/// U+D000..U+D7FF     ED     80..9F 80..BF
/// U+E000..U+FFFF     EE..EF 80..BF 80..BF
/// U+10000..U+3FFFF   F0     90..BF 80..BF 80..BF
/// U+40000..U+FFFFF   F1..F3 80..BF 80..BF 80..BF
/// U+100000..U+10FFFF F4     80..8F 80..BF 80..BF
/// ```
pub fn utf8_table_valid(bytes: &[u8]) -> bool {
    type Row = (std::ops::RangeInclusive<u8>, &'static [std::ops::RangeInclusive<u8>]);
    const T: std::ops::RangeInclusive<u8> = 0x80..=0xBF;
    let rows: [Row; 9] = [
        (0x00..=0x7F, &[]),
        (0xC2..=0xDF, &[T]),
        (0xE0..=0xE0, &[0xA0..=0xBF, T]),
        (0xE1..=0xEC, &[T, T]),
        (0xED..=0xED, &[0x80..=0x9F, T]),
        (0xEE..=0xEF, &[T, T]),
        (0xF0..=0xF0, &[0x90..=0xBF, T, T]),
        (0xF1..=0xF3, &[T, T, T]),
        (0xF4..=0xF4, &[0x80..=0x8F, T, T]),
    ];
    let mut i = 0;
    'outer: while i < bytes.len() {
        for (lead, tail) in &rows {
            if lead.contains(&bytes[i]) {
                for (k, range) in tail.iter().enumerate() {
                    match bytes.get(i + 1 + k) {
                        Some(b) if range.contains(b) => {}
                        _ => return false,
                    }
                }
                i += 1 + tail.len();
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// Python-style `b'...'` quoting of a string of printable ASCII.
pub fn quote_ascii(s: &str) -> String {
    let mut out = String::from("b'");
    for c in s.chars() {
        assert!(c.is_ascii_graphic() || c == ' ');
        if c == '\\' || c == '\'' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('\'');
    out
}

/// Central difference `(f(x+h) - f(x-h)) / 2h` of `f` along each coordinate.
pub fn central_differences(x: &[f64], h: f64, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Accuracy, precision and recall recounted from raw lists, female = 1.
/// Undefined ratios are 0.
pub fn brute_force_scores(preds: &[f64], labels: &[u8], threshold: f64) -> (f64, f64, f64) {
    let mut correct = 0u64;
    let mut predicted_pos = 0u64;
    let mut actual_pos = 0u64;
    let mut both = 0u64;
    for (p, y) in preds.iter().zip(labels) {
        let guess = u8::from(*p >= threshold);
        if guess == *y {
            correct += 1;
        }
        if guess == 1 {
            predicted_pos += 1;
        }
        if *y == 1 {
            actual_pos += 1;
        }
        if guess == 1 && *y == 1 {
            both += 1;
        }
    }
    let div = |a: u64, b: u64| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    (div(correct, preds.len() as u64), div(both, predicted_pos), div(both, actual_pos))
}
