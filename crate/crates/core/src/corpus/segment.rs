use super::normalize::TERMINATORS;

/// Splits normalized text into sentences on `.`, `?`, `!` and `;`.
///
/// Segments are trimmed and empty segments dropped; order is preserved.
pub fn segment_sentences(text: &str) -> Vec<String> {
    text.split(TERMINATORS)
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}
