use std::fmt::Write as _;

use serde::Serialize;

use super::Corpus;
use crate::error::{Error, Result};

/// Descriptive statistics of a count distribution (population std).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub total: usize,
    pub min: usize,
    pub max: usize,
    pub mean: f64,
    pub std: f64,
}

impl Summary {
    fn of(values: &[usize]) -> Summary {
        let n = values.len() as f64;
        let total: usize = values.iter().sum();
        let mean = total as f64 / n;
        let var = values.iter().map(|&v| (v as f64 - mean).powi(2)).sum::<f64>() / n;
        Summary {
            total,
            min: values.iter().copied().min().unwrap_or(0),
            max: values.iter().copied().max().unwrap_or(0),
            mean,
            std: var.sqrt(),
        }
    }
}

/// One row of the corpus statistics table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BookStats {
    /// `book-N` or `all`.
    pub portion: String,
    pub articles: usize,
    /// Sentences per article, counting the title as one sentence.
    pub sentences: Summary,
    /// Whitespace tokens per article, title included.
    pub words: Summary,
}

fn row(portion: String, per_article: &[(usize, usize)]) -> BookStats {
    let sentences: Vec<usize> = per_article.iter().map(|p| p.0).collect();
    let words: Vec<usize> = per_article.iter().map(|p| p.1).collect();
    BookStats {
        portion,
        articles: per_article.len(),
        sentences: Summary::of(&sentences),
        words: Summary::of(&words),
    }
}

/// Per-book rows followed by an `all` row.
pub fn corpus_stats(corpus: &Corpus) -> Result<Vec<BookStats>> {
    if corpus.articles.is_empty() {
        return Err(Error::Empty("corpus has no articles".into()));
    }
    let counts = |book: Option<u8>| -> Vec<(usize, usize)> {
        corpus
            .articles
            .iter()
            .filter(|a| book.is_none_or(|b| a.book == b))
            .map(|a| {
                let words = a.full_sequence().map(|s| s.split_whitespace().count()).sum();
                (1 + a.sentences.len(), words)
            })
            .collect()
    };
    let mut books = corpus.books();
    books.sort_unstable();
    let mut rows: Vec<BookStats> = books
        .into_iter()
        .map(|b| row(format!("book-{b}"), &counts(Some(b))))
        .collect();
    rows.push(row("all".to_string(), &counts(None)));
    Ok(rows)
}

/// CSV with one row per book plus `all`, columns in the order of the
/// classic corpus statistics table.
pub fn stats_csv(rows: &[BookStats]) -> String {
    let mut out = String::from(
        "portion,articles,sentences_tot,sentences_min,sentences_max,sentences_mean,sentences_std,\
         words_tot,words_min,words_max,words_mean,words_std\n",
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{:.3},{:.3},{},{},{},{:.3},{:.3}",
            r.portion,
            r.articles,
            r.sentences.total,
            r.sentences.min,
            r.sentences.max,
            r.sentences.mean,
            r.sentences.std,
            r.words.total,
            r.words.min,
            r.words.max,
            r.words.mean,
            r.words.std
        );
    }
    out
}
