//! Species references inside free-form expressions.
//!
//! A reference is either a double-quoted literal (`count("Dsh")`) or a bare
//! identifier that is not immediately followed by `(` or `[` (which would make
//! it a function or operator name such as `count` or `F`).

/// Byte range and text of each reference, in order of appearance.
pub fn references(expr: &str) -> Vec<(usize, usize, &str)> {
    let bytes = expr.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c == b'"' {
            let start = i + 1;
            let mut j = start;
            while j < bytes.len() && bytes[j] != b'"' {
                j += 1;
            }
            if j < bytes.len() && j > start {
                out.push((start, j, &expr[start..j]));
            }
            i = j + 1;
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            let mut j = i + 1;
            while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'_' || bytes[j] == b'-') {
                j += 1;
            }
            // a trailing '-' belongs to a following operator, not the name
            while j > start + 1 && bytes[j - 1] == b'-' {
                j -= 1;
            }
            let mut k = j;
            while k < bytes.len() && bytes[k] == b' ' {
                k += 1;
            }
            let called = k < bytes.len() && (bytes[k] == b'(' || bytes[k] == b'[');
            if !called {
                out.push((start, j, &expr[start..j]));
            }
            i = j;
        } else if c.is_ascii_digit() || c == b'.' {
            // skip numbers, including exponents such as 1e-3
            let mut j = i + 1;
            while j < bytes.len() && (bytes[j].is_ascii_alphanumeric() || bytes[j] == b'.') {
                j += 1;
            }
            i = j;
        } else {
            i += 1;
        }
    }
    out
}

/// Rewrites references through `rename`; `None` leaves a reference as is.
pub fn rewrite<'a>(expr: &'a str, mut rename: impl FnMut(&'a str) -> Option<String>) -> String {
    let mut out = String::with_capacity(expr.len());
    let mut last = 0;
    for (start, end, name) in references(expr) {
        if let Some(new) = rename(name) {
            out.push_str(&expr[last..start]);
            out.push_str(&new);
            last = end;
        }
    }
    out.push_str(&expr[last..]);
    out
}
