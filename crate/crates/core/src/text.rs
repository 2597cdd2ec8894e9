//! Token helpers shared by page search and content classification.

/// Whitespace tokens of `text`.
pub fn tokens(text: &str) -> Vec<&str> {
    text.split_whitespace().collect()
}

/// True when `needle` occurs as a contiguous run of whole tokens in `haystack`.
pub fn contains_phrase<S: AsRef<str>>(haystack: &[S], needle: &[S]) -> bool {
    if needle.is_empty() || needle.len() > haystack.len() {
        return false;
    }
    haystack
        .windows(needle.len())
        .any(|w| w.iter().zip(needle).all(|(a, b)| a.as_ref() == b.as_ref()))
}

/// Case-insensitive phrase containment.
pub fn contains_phrase_ci(haystack: &str, needle: &str) -> bool {
    let h: Vec<String> = haystack.split_whitespace().map(str::to_lowercase).collect();
    let n: Vec<String> = needle.split_whitespace().map(str::to_lowercase).collect();
    contains_phrase(&h, &n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phrase_matching_respects_word_boundaries() {
        assert!(contains_phrase_ci("Cat Pictures", "cat"));
        assert!(contains_phrase_ci("cat pictures daily", "cat pictures"));
        assert!(!contains_phrase_ci("category", "cat"));
        assert!(!contains_phrase_ci("pictures cat", "cat pictures"));
        assert!(!contains_phrase_ci("cat", ""));
    }
}
