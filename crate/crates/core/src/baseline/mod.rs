//! Nearest-centroid TF-IDF classifier.
//!
//! Each training unit is a TF-IDF vector (raw counts, `idf = ln(N/df)` over
//! units, L2-normalized); a class centroid is the renormalized mean of its
//! units. Queries are scored by cosine against every centroid and the
//! scores are sum-normalized into a distribution.

mod matrix;

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{normalize_text, word_tokens};
use crate::error::{Error, Result};
use crate::ids::ArticleId;
use crate::labeling::TrainingUnit;
use crate::querygen::QuerySet;
use crate::sparse::{SparseVector, TfIdf};

pub use matrix::{load_predictions, PredictionMatrix, LOAD_TOLERANCE, ROW_SUM_TOLERANCE};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CentroidModel {
    pub vocabulary: TfIdf,
    /// Class labels in ascending id order.
    pub article_ids: Vec<ArticleId>,
    /// Unit-norm centroid per class, aligned with `article_ids`.
    pub centroids: Vec<SparseVector>,
}

/// Fits the model. Every class must end up with a non-zero centroid.
pub fn train_baseline(units: &[TrainingUnit]) -> Result<CentroidModel> {
    if units.is_empty() {
        return Err(Error::Empty("training set has no units".into()));
    }
    let tokens: Vec<Vec<&str>> = units.iter().map(|u| word_tokens(&u.text).collect()).collect();
    let vocabulary = TfIdf::fit(&tokens);

    let mut sums: BTreeMap<&ArticleId, (SparseVector, usize)> = BTreeMap::new();
    for (unit, toks) in units.iter().zip(&tokens) {
        let mut v = vocabulary.weigh(toks);
        v.normalize();
        let entry = sums.entry(&unit.article_id).or_default();
        entry.0 = SparseVector::from_entries(entry.0.entries.iter().copied().chain(v.entries));
        entry.1 += 1;
    }

    let mut article_ids = Vec::with_capacity(sums.len());
    let mut centroids = Vec::with_capacity(sums.len());
    for (class, (sum, count)) in sums {
        let mut centroid = SparseVector::from_entries(sum.entries.into_iter().map(|(i, v)| (i, v / count as f64)));
        if !centroid.normalize() {
            return Err(Error::EmptyClass { class: class.clone() });
        }
        article_ids.push(class.clone());
        centroids.push(centroid);
    }
    Ok(CentroidModel {
        vocabulary,
        article_ids,
        centroids,
    })
}

impl CentroidModel {
    pub fn n_classes(&self) -> usize {
        self.article_ids.len()
    }

    /// Probability vector over `article_ids` for a raw query text.
    pub fn predict(&self, query: &str) -> Result<Vec<f64>> {
        let normalized = normalize_text(query);
        let tokens: Vec<&str> = word_tokens(&normalized).collect();
        if tokens.is_empty() {
            return Err(Error::Empty(format!(
                "query {query:?} has no terms after normalization"
            )));
        }
        let mut q = self.vocabulary.weigh(&tokens);
        q.normalize();
        let scores: Vec<f64> = self.centroids.iter().map(|c| q.dot(c).max(0.0)).collect();
        let total: f64 = scores.iter().sum();
        let n = self.n_classes() as f64;
        Ok(if total > 0.0 {
            scores.into_iter().map(|s| s / total).collect()
        } else {
            vec![1.0 / n; self.n_classes()]
        })
    }

    /// Predictions for every query, rows in query-set order.
    pub fn predict_set(&self, queries: &QuerySet) -> Result<PredictionMatrix> {
        let rows = queries
            .queries
            .iter()
            .map(|q| {
                self.predict(&q.text).map_err(|e| match e {
                    Error::Empty(_) => Error::Empty(format!("query {} has no terms", q.id)),
                    other => other,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PredictionMatrix {
            query_ids: queries.queries.iter().map(|q| q.id.clone()).collect(),
            article_ids: self.article_ids.clone(),
            rows,
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string(self).expect("model serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str, origin: &str) -> Result<CentroidModel> {
        let mut model: CentroidModel =
            serde_json::from_str(text).map_err(|e| Error::parse(format!("{origin}:{}:{}", e.line(), e.column()), e))?;
        model.vocabulary.reindex();
        if model.centroids.len() != model.article_ids.len() {
            return Err(Error::Validation(
                "model has mismatched centroid and class counts".into(),
            ));
        }
        Ok(model)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<CentroidModel> {
        let path = path.as_ref();
        CentroidModel::from_json(&crate::io::read_to_string(path)?, &path.display().to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labeling::Scheme;
    use proptest::prelude::*;

    fn unit(article: &str, text: &str) -> TrainingUnit {
        TrainingUnit {
            article_id: ArticleId::new(article),
            book: 1,
            scheme: Scheme::UniRr,
            replica: 0,
            block_index: 0,
            text: text.into(),
        }
    }

    fn disjoint_units() -> Vec<TrainingUnit> {
        vec![
            unit("1", "alfa beta"),
            unit("1", "gamma alfa"),
            unit("2", "delta epsilon"),
            unit("2", "zeta eta"),
            unit("3", "theta iota kappa"),
        ]
    }

    /// Independent cosine scores: dense TF-IDF vectors built from scratch.
    fn brute_force_scores(units: &[TrainingUnit], query: &str) -> Vec<(String, f64)> {
        let mut vocab: Vec<String> = units.iter().flat_map(|u| u.text.split(' ').map(String::from)).collect();
        vocab.sort();
        vocab.dedup();
        let n = units.len() as f64;
        let idf: Vec<f64> = vocab
            .iter()
            .map(|t| (n / units.iter().filter(|u| u.text.split(' ').any(|w| w == t)).count() as f64).ln())
            .collect();
        let vec_of = |text: &str| -> Vec<f64> {
            let v: Vec<f64> = vocab
                .iter()
                .zip(&idf)
                .map(|(t, w)| text.split(' ').filter(|x| x == t).count() as f64 * w)
                .collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter().map(|x| if norm > 0.0 { x / norm } else { 0.0 }).collect()
        };
        let mut classes: Vec<String> = units.iter().map(|u| u.article_id.to_string()).collect();
        classes.sort();
        classes.dedup();
        let q = vec_of(query);
        classes
            .into_iter()
            .map(|c| {
                let mut mean = vec![0.0; vocab.len()];
                let members: Vec<&TrainingUnit> = units.iter().filter(|u| u.article_id.as_str() == c).collect();
                for u in &members {
                    for (m, x) in mean.iter_mut().zip(vec_of(&u.text)) {
                        *m += x / members.len() as f64;
                    }
                }
                let norm = mean.iter().map(|x| x * x).sum::<f64>().sqrt();
                let cos: f64 = mean.iter().zip(&q).map(|(a, b)| a / norm * b).sum();
                (c, cos)
            })
            .collect()
    }

    #[test]
    fn disjoint_vocabulary_argmax() {
        let units = disjoint_units();
        let model = train_baseline(&units).unwrap();
        let p = model.predict("delta epsilon").unwrap();
        let oracle = brute_force_scores(&units, "delta epsilon");
        assert_eq!(oracle[0].1, 0.0);
        assert_eq!(oracle[2].1, 0.0);
        assert!(oracle[1].1 > 0.0);
        assert_eq!(p, vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn probabilities_match_oracle() {
        let units = vec![
            unit("1", "casa bene casa"),
            unit("1", "bene muro"),
            unit("2", "muro tetto"),
            unit("3", "tetto casa"),
        ];
        let model = train_baseline(&units).unwrap();
        let oracle = brute_force_scores(&units, "casa muro");
        let total: f64 = oracle.iter().map(|(_, s)| s.max(0.0)).sum();
        let p = model.predict("casa muro").unwrap();
        for (got, (_, s)) in p.iter().zip(&oracle) {
            assert!((got - s / total).abs() < 1e-12);
        }
    }

    #[test]
    fn unknown_terms_give_uniform() {
        let model = train_baseline(&disjoint_units()).unwrap();
        let p = model.predict("sconosciuto").unwrap();
        assert_eq!(p, vec![1.0 / 3.0; 3]);
        assert!(matches!(model.predict("123 !!"), Err(Error::Empty(_))));
    }

    #[test]
    fn empty_class_is_rejected() {
        // "comune" is in every unit, so its idf is zero and class 2 has no weight.
        let units = vec![unit("1", "comune alfa"), unit("2", "comune"), unit("3", "comune beta")];
        match train_baseline(&units) {
            Err(Error::EmptyClass { class }) => assert_eq!(class.as_str(), "2"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn self_retrieval_on_disjoint_vocabularies() {
        let units = disjoint_units();
        let model = train_baseline(&units).unwrap();
        for u in &units {
            let p = model.predict(&u.text).unwrap();
            let best = p.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
            assert_eq!(model.article_ids[best], u.article_id);
        }
    }

    #[test]
    fn json_round_trip() {
        let model = train_baseline(&disjoint_units()).unwrap();
        let back = CentroidModel::from_json(&model.to_json(), "m").unwrap();
        assert_eq!(back.predict("alfa zeta").unwrap(), model.predict("alfa zeta").unwrap());
    }

    proptest! {
        #[test]
        fn scale_invariant_and_normalized(
            words in proptest::collection::vec(prop_oneof!["alfa", "beta", "delta", "zeta", "theta", "nuovo"], 1..6),
            k in 1usize..5,
        ) {
            let model = train_baseline(&disjoint_units()).unwrap();
            let once = words.join(" ");
            let repeated = vec![once.clone(); k].join(" ");
            let a = model.predict(&once).unwrap();
            let b = model.predict(&repeated).unwrap();
            prop_assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() < 1e-12);
                prop_assert!(*x >= 0.0);
            }
        }
    }
}
