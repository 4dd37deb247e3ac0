//! Sparse vectors and the TF-IDF weighting shared by the baseline
//! classifier and article clustering.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

/// Sparse real vector with entries sorted by ascending index.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SparseVector {
    pub entries: Vec<(u32, f64)>,
}

impl SparseVector {
    /// Builds from unsorted entries; duplicate indices are summed and zeros dropped.
    pub fn from_entries(entries: impl IntoIterator<Item = (u32, f64)>) -> Self {
        let mut map: BTreeMap<u32, f64> = BTreeMap::new();
        for (i, v) in entries {
            *map.entry(i).or_default() += v;
        }
        SparseVector {
            entries: map.into_iter().filter(|(_, v)| *v != 0.0).collect(),
        }
    }

    pub fn from_dense(values: &[f64]) -> Self {
        SparseVector {
            entries: values
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(i, v)| (i as u32, *v))
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|(_, v)| v * v).sum::<f64>().sqrt()
    }

    /// Scales to unit L2 norm. Returns false (leaving the vector untouched)
    /// when the norm is zero.
    pub fn normalize(&mut self) -> bool {
        let n = self.norm();
        if n == 0.0 {
            return false;
        }
        for (_, v) in &mut self.entries {
            *v /= n;
        }
        true
    }

    pub fn dot(&self, other: &SparseVector) -> f64 {
        let (mut i, mut j, mut acc) = (0, 0, 0.0);
        let (a, b) = (&self.entries, &other.entries);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += a[i].1 * b[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }

    pub fn dot_dense(&self, dense: &[f64]) -> f64 {
        self.entries.iter().map(|(i, v)| v * dense[*i as usize]).sum()
    }

    pub fn add_to_dense(&self, dense: &mut [f64]) {
        for (i, v) in &self.entries {
            dense[*i as usize] += v;
        }
    }

    /// Largest index plus one (0 for the zero vector).
    pub fn dim_hint(&self) -> usize {
        self.entries.last().map(|(i, _)| *i as usize + 1).unwrap_or(0)
    }
}

/// Term vocabulary with natural-log inverse document frequencies,
/// `idf(t) = ln(N / df(t))`, no smoothing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TfIdf {
    /// Terms in ascending lexical order; a term's index is its position.
    pub terms: Vec<String>,
    pub idf: Vec<f64>,
    #[serde(skip)]
    index: HashMap<String, u32>,
}

impl TfIdf {
    /// Fits over tokenized documents.
    pub fn fit<D, T>(docs: D) -> TfIdf
    where
        D: IntoIterator<Item = T>,
        T: IntoIterator,
        T::Item: AsRef<str>,
    {
        let mut df: BTreeMap<String, usize> = BTreeMap::new();
        let mut n_docs = 0usize;
        for doc in docs {
            n_docs += 1;
            let mut seen: Vec<String> = doc.into_iter().map(|t| t.as_ref().to_string()).collect();
            seen.sort_unstable();
            seen.dedup();
            for t in seen {
                *df.entry(t).or_default() += 1;
            }
        }
        let (terms, idf): (Vec<String>, Vec<f64>) = df
            .into_iter()
            .map(|(t, d)| {
                let idf = (n_docs as f64 / d as f64).ln();
                (t, idf)
            })
            .unzip();
        TfIdf::from_parts(terms, idf)
    }

    pub fn from_parts(terms: Vec<String>, idf: Vec<f64>) -> TfIdf {
        let index = terms.iter().enumerate().map(|(i, t)| (t.clone(), i as u32)).collect();
        TfIdf { terms, idf, index }
    }

    /// Rebuilds the lookup index after deserialization.
    pub fn reindex(&mut self) {
        *self = TfIdf::from_parts(std::mem::take(&mut self.terms), std::mem::take(&mut self.idf));
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term_index(&self, term: &str) -> Option<u32> {
        self.index.get(term).copied()
    }

    /// Raw-count TF times IDF, out-of-vocabulary tokens ignored. Not normalized.
    pub fn weigh<I>(&self, tokens: I) -> SparseVector
    where
        I: IntoIterator,
        I::Item: AsRef<str>,
    {
        SparseVector::from_entries(tokens.into_iter().filter_map(|t| {
            let i = self.term_index(t.as_ref())?;
            Some((i, self.idf[i as usize]))
        }))
    }
}
