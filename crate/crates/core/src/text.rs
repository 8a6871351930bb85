//! Shared tokenization helpers.
//!
//! A "token" throughout this crate is a whitespace-delimited unit of
//! normalized text. Lexical retrieval and grounding checks additionally
//! lowercase, strip punctuation, and (for content words) drop stop-words.

use std::collections::HashSet;
use std::sync::OnceLock;

/// Count whitespace-delimited tokens. Used for chunk offsets, word counts,
/// and as the fallback token accounting for backends that report no usage.
pub fn whitespace_token_count(text: &str) -> usize {
    text.split_whitespace().count()
}

/// Lowercased alphanumeric terms for lexical scoring. Splits on any
/// non-alphanumeric character, so "re-use" yields ["re", "use"].
pub fn lexical_terms(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| t.to_lowercase())
        .collect()
}

const STOPWORDS: &[&str] = &[
    "a", "an", "and", "are", "as", "at", "be", "been", "but", "by", "can", "do", "does", "for",
    "from", "had", "has", "have", "if", "in", "into", "is", "it", "its", "may", "must", "no",
    "not", "of", "on", "or", "shall", "should", "so", "such", "that", "the", "their", "them",
    "then", "there", "these", "they", "this", "to", "was", "were", "which", "will", "with",
    "would",
];

fn stopword_set() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| STOPWORDS.iter().copied().collect())
}

/// Distinct content words of a text: lexical terms minus stop-words.
pub fn content_words(text: &str) -> HashSet<String> {
    lexical_terms(text)
        .into_iter()
        .filter(|t| !stopword_set().contains(t.as_str()))
        .collect()
}

/// Truncate to the first `n` characters (code points, not bytes).
pub fn truncate_chars(text: &str, n: usize) -> &str {
    match text.char_indices().nth(n) {
        Some((idx, _)) => &text[..idx],
        None => text,
    }
}
