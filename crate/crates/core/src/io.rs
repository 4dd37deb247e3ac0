//! JSON Lines helpers.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

/// Serializes records one per line, each line newline-terminated.
pub fn to_jsonl<T: Serialize>(records: &[T]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("record serializes"));
        out.push('\n');
    }
    out
}

/// Parses JSON Lines text; blank lines are skipped.
pub fn from_jsonl<T: DeserializeOwned>(text: &str, origin: &str) -> Result<Vec<T>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| Error::parse(format!("{origin}:{}:{}", i + 1, e.column()), e))
        })
        .collect()
}

pub fn read_jsonl<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    let path = path.as_ref();
    let text = read_to_string(path)?;
    from_jsonl(&text, &path.display().to_string())
}

pub fn read_to_string(path: impl AsRef<Path>) -> Result<String> {
    let path = path.as_ref();
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Reads a one-term-per-line list, skipping blank lines.
pub fn read_term_list(path: impl AsRef<Path>) -> Result<Vec<String>> {
    Ok(parse_term_list(&read_to_string(path)?))
}

pub fn parse_term_list(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect()
}
