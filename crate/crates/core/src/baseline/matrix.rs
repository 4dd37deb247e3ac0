//! Per-query probability distributions over article classes, and their CSV
//! exchange format.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::ids::ArticleId;

/// Row-sum tolerance of a valid matrix.
pub const ROW_SUM_TOLERANCE: f64 = 1e-6;
/// Rows read from a file are renormalized when their sum is this close to 1.
pub const LOAD_TOLERANCE: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq)]
pub struct PredictionMatrix {
    pub query_ids: Vec<String>,
    pub article_ids: Vec<ArticleId>,
    pub rows: Vec<Vec<f64>>,
}

impl PredictionMatrix {
    pub fn n_classes(&self) -> usize {
        self.article_ids.len()
    }

    pub fn column_index(&self) -> HashMap<&ArticleId, usize> {
        self.article_ids.iter().enumerate().map(|(i, a)| (a, i)).collect()
    }

    pub fn row_of(&self, query_id: &str) -> Option<&[f64]> {
        self.query_ids
            .iter()
            .position(|q| q == query_id)
            .map(|i| self.rows[i].as_slice())
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows.len() != self.query_ids.len() {
            return Err(Error::Predictions(format!(
                "{} rows for {} query ids",
                self.rows.len(),
                self.query_ids.len()
            )));
        }
        let mut cols = HashSet::new();
        if let Some(dup) = self.article_ids.iter().find(|a| !cols.insert(*a)) {
            return Err(Error::Predictions(format!("duplicate article column {dup}")));
        }
        for (q, row) in self.query_ids.iter().zip(&self.rows) {
            check_row(q, row, self.article_ids.len())?;
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::Predictions(format!("row {q} sums to {sum}")));
            }
        }
        Ok(())
    }

    /// Exchange CSV: `query_id,<article ids...>`, probabilities in
    /// scientific notation with ten significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("query_id");
        for a in &self.article_ids {
            out.push(',');
            out.push_str(a.as_str());
        }
        out.push('\n');
        for (q, row) in self.query_ids.iter().zip(&self.rows) {
            out.push_str(q);
            for p in row {
                let _ = write!(out, ",{p:.9e}");
            }
            out.push('\n');
        }
        out
    }

    /// Parses and validates the exchange CSV. When `expected` is given the
    /// column set must equal it exactly.
    pub fn from_csv(text: &str, origin: &str, expected: Option<&[ArticleId]>) -> Result<PredictionMatrix> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = reader.headers().map_err(|e| Error::parse(origin, e))?.clone();
        if headers.get(0) != Some("query_id") {
            return Err(Error::parse(format!("{origin}:1"), "first column must be query_id"));
        }
        let article_ids: Vec<ArticleId> = headers.iter().skip(1).map(ArticleId::new).collect();
        if article_ids.is_empty() {
            return Err(Error::Predictions("no article columns".into()));
        }
        if let Some(expected) = expected {
            let expected: HashSet<&ArticleId> = expected.iter().collect();
            if let Some(unknown) = article_ids.iter().find(|a| !expected.contains(a)) {
                return Err(Error::Predictions(format!("unknown article column {unknown}")));
            }
            let present: HashSet<&ArticleId> = article_ids.iter().collect();
            let mut missing: Vec<&&ArticleId> = expected.iter().filter(|a| !present.contains(**a)).collect();
            missing.sort();
            if let Some(first) = missing.first() {
                return Err(Error::Predictions(format!(
                    "{} article column(s) missing, first {first}",
                    missing.len()
                )));
            }
        }

        let mut query_ids = Vec::new();
        let mut rows = Vec::new();
        let mut seen = HashSet::new();
        for (n, record) in reader.records().enumerate() {
            let line = n + 2;
            let record = record.map_err(|e| Error::parse(format!("{origin}:{line}"), e))?;
            let qid = record.get(0).unwrap_or_default().to_string();
            if !seen.insert(qid.clone()) {
                return Err(Error::Predictions(format!("duplicate query id {qid}")));
            }
            let row = record
                .iter()
                .skip(1)
                .map(|v| {
                    v.parse::<f64>()
                        .map_err(|e| Error::parse(format!("{origin}:{line}"), format!("{v:?}: {e}")))
                })
                .collect::<Result<Vec<f64>>>()?;
            check_row(&qid, &row, article_ids.len())?;
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > LOAD_TOLERANCE {
                return Err(Error::Predictions(format!(
                    "row {qid} sums to {sum}, outside 1 ± {LOAD_TOLERANCE}"
                )));
            }
            query_ids.push(qid);
            rows.push(row.into_iter().map(|p| p / sum).collect());
        }
        let matrix = PredictionMatrix {
            query_ids,
            article_ids,
            rows,
        };
        matrix.validate()?;
        Ok(matrix)
    }
}

fn check_row(query: &str, row: &[f64], n: usize) -> Result<()> {
    if row.len() != n {
        return Err(Error::Predictions(format!(
            "row {query} has {} values for {n} columns",
            row.len()
        )));
    }
    if let Some(bad) = row.iter().find(|p| !p.is_finite() || **p < 0.0) {
        return Err(Error::Predictions(format!("row {query} has invalid probability {bad}")));
    }
    Ok(())
}

/// Reads a prediction CSV, validating columns against `expected` when given.
pub fn load_predictions(path: impl AsRef<Path>, expected: Option<&[ArticleId]>) -> Result<PredictionMatrix> {
    let path = path.as_ref();
    let text = crate::io::read_to_string(path)?;
    PredictionMatrix::from_csv(&text, &path.display().to_string(), expected)
}
