//! Character-offset helpers. All public offsets in the crate count Unicode
//! scalar values, not bytes.

/// Number of chars in `s`.
pub fn char_len(s: &str) -> usize {
    s.chars().count()
}

/// Byte offset of the `char_idx`-th char, or `s.len()` for the end position.
pub fn byte_offset(s: &str, char_idx: usize) -> Option<usize> {
    if char_idx == 0 {
        return Some(0);
    }
    let mut count = 0;
    for (b, _) in s.char_indices() {
        if count == char_idx {
            return Some(b);
        }
        count += 1;
    }
    (count == char_idx).then_some(s.len())
}

/// Slice `s` by char offsets `[start, end)`.
pub fn char_slice(s: &str, start: usize, end: usize) -> Option<&str> {
    if start > end {
        return None;
    }
    let b0 = byte_offset(s, start)?;
    let b1 = b0 + byte_offset(&s[b0..], end - start)?;
    Some(&s[b0..b1])
}

/// Replace the chars in `[start, end)` with `replacement`.
pub fn char_splice(s: &str, start: usize, end: usize, replacement: &str) -> Option<String> {
    let b0 = byte_offset(s, start)?;
    let b1 = b0 + byte_offset(&s[b0..], end.checked_sub(start)?)?;
    let mut out = String::with_capacity(s.len() + replacement.len());
    out.push_str(&s[..b0]);
    out.push_str(replacement);
    out.push_str(&s[b1..]);
    Some(out)
}

/// Comparison used between an annotated term and the text it points at:
/// surrounding whitespace trimmed, case folded.
pub fn normalized_eq(a: &str, b: &str) -> bool {
    a.trim().to_lowercase() == b.trim().to_lowercase()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slices_by_chars() {
        let s = "é um hotel ótimo";
        assert_eq!(char_slice(s, 5, 10), Some("hotel"));
        assert_eq!(char_slice(s, 11, 16), Some("ótimo"));
        assert_eq!(char_slice(s, 11, 17), None);
        assert_eq!(char_slice(s, 16, 16), Some(""));
        assert_eq!(char_len(s), 16);
    }

    #[test]
    fn splices_by_chars() {
        let s = "nesse hotel pela";
        assert_eq!(
            char_splice(s, 6, 11, "pousada").as_deref(),
            Some("nesse pousada pela")
        );
    }

    #[test]
    fn normalization_trims_and_folds() {
        assert!(normalized_eq(" Hotel", "hotel"));
        assert!(!normalized_eq("hotel", "hotéis"));
    }
}
