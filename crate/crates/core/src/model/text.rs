//! Tokenization used by textual `matches` queries.

/// Lowercased runs of alphanumeric characters; everything else separates.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// True when `needle`'s tokens occur contiguously in `haystack`'s tokens.
/// An operand with no tokens matches nothing.
pub fn contains_phrase(haystack: &str, needle: &str) -> bool {
    let needle = tokenize(needle);
    if needle.is_empty() {
        return false;
    }
    tokenize(haystack).windows(needle.len()).any(|w| w == needle.as_slice())
}
