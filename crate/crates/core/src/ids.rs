//! Article identifiers and corpus scopes.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// Latin insertion suffixes in their legislative order.
const LATIN_SUFFIXES: &[&str] = &[
    "bis",
    "ter",
    "quater",
    "quinquies",
    "sexies",
    "septies",
    "octies",
    "novies",
    "decies",
    "undecies",
    "duodecies",
    "terdecies",
    "quaterdecies",
    "quinquiesdecies",
    "sexiesdecies",
    "septiesdecies",
];

fn suffix_rank(suffix: &str) -> Option<usize> {
    let suffix = if suffix == "nonies" { "novies" } else { suffix };
    LATIN_SUFFIXES.iter().position(|s| *s == suffix)
}

/// Canonical article identifier such as `"456"` or `"456-bis"`.
///
/// Identifiers are compared in natural order: numeric part first, then the
/// Latin suffix in legislative order (`bis` < `ter` < `quater` ...), so
/// `"2" < "10" < "10-bis" < "10-ter" < "11"`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ArticleId(String);

impl ArticleId {
    /// Builds an id from raw text: trims, lowercases, and rewrites
    /// `"456 bis"`, `"456bis"` or `"456_bis"` to `"456-bis"`.
    pub fn new(raw: &str) -> Self {
        let lowered = raw.trim().to_lowercase();
        let compact: String = lowered.split_whitespace().collect::<Vec<_>>().join(" ");
        let digits_end = compact
            .char_indices()
            .find(|(_, c)| !c.is_ascii_digit())
            .map(|(i, _)| i)
            .unwrap_or(compact.len());
        if digits_end > 0 && digits_end < compact.len() {
            let (num, rest) = compact.split_at(digits_end);
            let suffix = rest.trim_start_matches([' ', '-', '_']);
            if !suffix.is_empty() && suffix.chars().all(|c| c.is_ascii_lowercase()) {
                return ArticleId(format!("{num}-{suffix}"));
            }
        }
        ArticleId(compact)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    fn sort_key(&self) -> (Option<u64>, Option<&str>) {
        let s = self.0.as_str();
        let (num, rest) = match s.find(|c: char| !c.is_ascii_digit()) {
            Some(0) => return (None, None),
            Some(i) => (&s[..i], s[i..].trim_start_matches('-')),
            None => (s, ""),
        };
        match num.parse::<u64>() {
            Ok(n) => (Some(n), if rest.is_empty() { None } else { Some(rest) }),
            Err(_) => (None, None),
        }
    }
}

impl Ord for ArticleId {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.sort_key(), other.sort_key()) {
            ((Some(a), sa), (Some(b), sb)) => a
                .cmp(&b)
                .then_with(|| match (sa, sb) {
                    (None, None) => Ordering::Equal,
                    (None, Some(_)) => Ordering::Less,
                    (Some(_), None) => Ordering::Greater,
                    (Some(x), Some(y)) => match (suffix_rank(x), suffix_rank(y)) {
                        (Some(rx), Some(ry)) => rx.cmp(&ry),
                        (Some(_), None) => Ordering::Less,
                        (None, Some(_)) => Ordering::Greater,
                        (None, None) => x.cmp(y),
                    },
                })
                .then_with(|| self.0.cmp(&other.0)),
            ((Some(_), _), (None, _)) => Ordering::Less,
            ((None, _), (Some(_), _)) => Ordering::Greater,
            _ => self.0.cmp(&other.0),
        }
    }
}

impl PartialOrd for ArticleId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ArticleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for ArticleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl From<&str> for ArticleId {
    fn from(raw: &str) -> Self {
        ArticleId::new(raw)
    }
}

impl Serialize for ArticleId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for ArticleId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        Ok(ArticleId::new(&raw))
    }
}

/// The portion of the code a model or query set refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scope {
    /// The whole code (global model).
    Whole,
    /// A single book (local model).
    Book(u8),
}

impl Scope {
    pub fn contains_book(&self, book: u8) -> bool {
        match self {
            Scope::Whole => true,
            Scope::Book(b) => *b == book,
        }
    }

    /// Filesystem-friendly form: `all` or `book2`.
    pub fn file_stem(&self) -> String {
        match self {
            Scope::Whole => "all".to_string(),
            Scope::Book(b) => format!("book{b}"),
        }
    }
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scope::Whole => f.write_str("all"),
            Scope::Book(b) => write!(f, "book:{b}"),
        }
    }
}

impl FromStr for Scope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().to_ascii_lowercase();
        if s == "all" || s == "whole" {
            return Ok(Scope::Whole);
        }
        let num = s
            .strip_prefix("book:")
            .or_else(|| s.strip_prefix("book"))
            .ok_or_else(|| Error::Config(format!("invalid scope {s:?}; expected all or book:<n>")))?;
        num.parse::<u8>()
            .ok()
            .filter(|b| *b >= 1)
            .map(Scope::Book)
            .ok_or_else(|| Error::Config(format!("invalid book number in scope {s:?}")))
    }
}

impl Serialize for Scope {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Scope {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        raw.parse().map_err(serde::de::Error::custom)
    }
}
