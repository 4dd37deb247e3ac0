//! Selection of domain terms to inject into a pre-trained tokenizer
//! vocabulary.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::corpus::{normalize_text, word_tokens, Corpus};
use crate::error::{Error, Result};
use crate::ids::Scope;

/// Default Italian stopword list (accents already folded to ASCII).
pub const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords_it.txt");

/// Continuation / word-boundary markers used by common subword vocabularies.
const SUBWORD_MARKERS: &[&str] = &["##", "\u{2581}", "\u{0120}"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InjectionReport {
    pub scope: Scope,
    pub n_candidates: usize,
    pub n_injected: usize,
    pub base_vocab_size: usize,
    pub final_vocab_size: usize,
    /// Injected terms, sorted.
    pub terms: Vec<String>,
    /// Candidate terms that survived the filters, sorted.
    #[serde(skip)]
    pub candidate_terms: Vec<String>,
}

/// Base vocabulary as a set of surface forms with subword markers stripped.
#[derive(Clone, Debug, Default)]
pub struct BaseVocabulary {
    surface: HashSet<String>,
    size: usize,
}

impl BaseVocabulary {
    pub fn from_entries<I, S>(entries: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let raw: BTreeSet<String> = entries.into_iter().map(|e| e.as_ref().to_string()).collect();
        let surface = raw.iter().map(|e| strip_markers(e).to_string()).collect();
        BaseVocabulary {
            size: raw.len(),
            surface,
        }
    }

    /// Number of distinct raw entries.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn contains(&self, term: &str) -> bool {
        self.surface.contains(term)
    }
}

fn strip_markers(entry: &str) -> &str {
    SUBWORD_MARKERS
        .iter()
        .find_map(|m| entry.strip_prefix(m))
        .unwrap_or(entry)
}

/// Stopword set; entries are normalized the same way as corpus text.
pub fn stopword_set<I, S>(entries: I) -> HashSet<String>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    entries
        .into_iter()
        .flat_map(|e| {
            let n = normalize_text(e.as_ref());
            word_tokens(&n).map(str::to_string).collect::<Vec<_>>()
        })
        .collect()
}

pub fn default_stopwords() -> HashSet<String> {
    stopword_set(crate::io::parse_term_list(DEFAULT_STOPWORDS))
}

/// Filters corpus terms down to injection candidates: stopwords removed,
/// terms in more than `df_ceiling` of the articles removed, hapax (corpus
/// frequency one) removed; candidates absent from the base vocabulary are
/// injected.
pub fn select_injection_terms(
    corpus: &Corpus,
    base_vocab: &BaseVocabulary,
    stopwords: &HashSet<String>,
    df_ceiling: f64,
) -> Result<InjectionReport> {
    if !(df_ceiling > 0.0 && df_ceiling <= 1.0) {
        return Err(Error::Config(format!("df ceiling {df_ceiling} outside (0, 1]")));
    }
    if corpus.articles.is_empty() {
        return Err(Error::Empty(format!("scope {} has no articles", corpus.scope)));
    }
    let n_articles = corpus.articles.len() as f64;

    // term -> (document frequency, corpus frequency)
    let mut freq: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for article in &corpus.articles {
        let mut in_article: HashSet<&str> = HashSet::new();
        for tok in article.full_sequence().flat_map(word_tokens) {
            let entry = freq.entry(tok).or_default();
            entry.1 += 1;
            if in_article.insert(tok) {
                entry.0 += 1;
            }
        }
    }

    let candidate_terms: Vec<String> = freq
        .into_iter()
        .filter(|(t, _)| !stopwords.contains(*t))
        .filter(|(_, (df, _))| (*df as f64) <= df_ceiling * n_articles)
        .filter(|(_, (_, cf))| *cf > 1)
        .map(|(t, _)| t.to_string())
        .collect();
    let terms: Vec<String> = candidate_terms
        .iter()
        .filter(|t| !base_vocab.contains(t))
        .cloned()
        .collect();

    Ok(InjectionReport {
        scope: corpus.scope,
        n_candidates: candidate_terms.len(),
        n_injected: terms.len(),
        base_vocab_size: base_vocab.size(),
        final_vocab_size: base_vocab.size() + terms.len(),
        terms,
        candidate_terms,
    })
}
