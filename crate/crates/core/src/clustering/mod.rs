//! Article partitions used as relevance sets in article-driven multi-label
//! evaluation: the code's own divisions, or bisecting spherical k-means
//! over TF-IDF vectors or external embeddings.

mod kmeans;

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{word_tokens, Corpus};
use crate::error::{Error, Result};
use crate::ids::{ArticleId, Scope};
use crate::sparse::{SparseVector, TfIdf};

pub use kmeans::{bisect, KMeansConfig, SplitTrace};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PartitionSource {
    IccClassification,
    ClusteringTfidf,
    ClusteringEmbeddings,
}

/// Article to partition assignment over a scope.
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionMap {
    pub scope: Scope,
    pub source: PartitionSource,
    pub assignments: BTreeMap<ArticleId, String>,
}

impl PartitionMap {
    pub fn partition_of(&self, article: &ArticleId) -> Option<&str> {
        self.assignments.get(article).map(String::as_str)
    }

    /// Members of each partition, in ascending article order.
    pub fn groups(&self) -> BTreeMap<&str, Vec<&ArticleId>> {
        let mut groups: BTreeMap<&str, Vec<&ArticleId>> = BTreeMap::new();
        for (a, p) in &self.assignments {
            groups.entry(p.as_str()).or_default().push(a);
        }
        groups
    }

    pub fn n_partitions(&self) -> usize {
        self.groups().len()
    }

    /// Every scope article appears exactly once and nothing else does.
    pub fn validate(&self, corpus: &Corpus) -> Result<()> {
        let scoped: HashSet<&ArticleId> = corpus
            .articles
            .iter()
            .filter(|a| self.scope.contains_book(a.book))
            .map(|a| &a.id)
            .collect();
        if let Some(extra) = self.assignments.keys().find(|a| !scoped.contains(a)) {
            return Err(Error::Validation(format!("partition assigns unknown article {extra}")));
        }
        if let Some(missing) = scoped.iter().find(|a| !self.assignments.contains_key(**a)) {
            return Err(Error::Validation(format!("partition misses article {missing}")));
        }
        Ok(())
    }

    /// CSV `article_id,partition_id`, rows in ascending article order.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("article_id,partition_id\n");
        for (a, p) in &self.assignments {
            let _ = writeln!(out, "{a},{p}");
        }
        out
    }

    pub fn from_csv(text: &str, origin: &str, scope: Scope, source: PartitionSource) -> Result<PartitionMap> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = reader.headers().map_err(|e| Error::parse(origin, e))?.clone();
        if headers.iter().collect::<Vec<_>>() != ["article_id", "partition_id"] {
            return Err(Error::parse(
                format!("{origin}:1"),
                "expected header article_id,partition_id",
            ));
        }
        let mut assignments = BTreeMap::new();
        for (n, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::parse(format!("{origin}:{}", n + 2), e))?;
            let id = ArticleId::new(&record[0]);
            if assignments.insert(id.clone(), record[1].to_string()).is_some() {
                return Err(Error::Validation(format!("article {id} assigned twice")));
            }
        }
        Ok(PartitionMap {
            scope,
            source,
            assignments,
        })
    }

    pub fn read(path: impl AsRef<Path>, scope: Scope, source: PartitionSource) -> Result<PartitionMap> {
        let path = path.as_ref();
        PartitionMap::from_csv(
            &crate::io::read_to_string(path)?,
            &path.display().to_string(),
            scope,
            source,
        )
    }
}

/// Each article labeled with the division that directly contains it.
pub fn icc_partition(corpus: &Corpus) -> PartitionMap {
    PartitionMap {
        scope: corpus.scope,
        source: PartitionSource::IccClassification,
        assignments: corpus
            .articles
            .iter()
            .map(|a| (a.id.clone(), a.terminal_division().to_string()))
            .collect(),
    }
}

/// Unit TF-IDF vector per article over the full text (title and
/// sentences), `idf = ln(N_articles / df)`, ascending article order.
/// Articles whose every term occurs in all articles get a zero vector.
pub fn tfidf_article_vectors(corpus: &Corpus) -> Vec<(ArticleId, SparseVector)> {
    let articles = corpus.sorted_articles();
    let docs: Vec<Vec<&str>> = articles
        .iter()
        .map(|a| a.full_sequence().flat_map(word_tokens).collect())
        .collect();
    let model = TfIdf::fit(&docs);
    articles
        .iter()
        .zip(&docs)
        .map(|(a, toks)| {
            let mut v = model.weigh(toks);
            v.normalize();
            (a.id.clone(), v)
        })
        .collect()
}

/// `max(1, round(n / target_mean_size))`, at most `n`.
pub fn choose_k(n_articles: usize, target_mean_size: f64) -> usize {
    let k = (n_articles as f64 / target_mean_size).round() as usize;
    k.max(1).min(n_articles.max(1))
}

/// Bisecting spherical k-means over labeled unit vectors. Partition ids are
/// `0..k`, numbered by each cluster's smallest article id.
pub fn bisecting_spherical_kmeans(
    vectors: &[(ArticleId, SparseVector)],
    scope: Scope,
    source: PartitionSource,
    config: &KMeansConfig,
) -> Result<PartitionMap> {
    Ok(bisecting_spherical_kmeans_traced(vectors, scope, source, config)?.0)
}

pub fn bisecting_spherical_kmeans_traced(
    vectors: &[(ArticleId, SparseVector)],
    scope: Scope,
    source: PartitionSource,
    config: &KMeansConfig,
) -> Result<(PartitionMap, Vec<SplitTrace>)> {
    let mut seen = HashSet::new();
    if let Some((dup, _)) = vectors.iter().find(|(id, _)| !seen.insert(id)) {
        return Err(Error::Clustering(format!("duplicate article id {dup}")));
    }
    if let Some((id, _)) = vectors.iter().find(|(_, v)| v.is_zero()) {
        return Err(Error::Clustering(format!("article {id} has a zero vector")));
    }
    let refs: Vec<&SparseVector> = vectors.iter().map(|(_, v)| v).collect();
    let (labels, traces) = bisect(&refs, config)?;

    let mut order: Vec<usize> = (0..vectors.len()).collect();
    order.sort_by(|&a, &b| vectors[a].0.cmp(&vectors[b].0));
    let mut renumber: BTreeMap<usize, usize> = BTreeMap::new();
    for &i in &order {
        let next = renumber.len();
        renumber.entry(labels[i]).or_insert(next);
    }
    let assignments = vectors
        .iter()
        .zip(&labels)
        .map(|((id, _), l)| (id.clone(), renumber[l].to_string()))
        .collect();
    Ok((
        PartitionMap {
            scope,
            source,
            assignments,
        },
        traces,
    ))
}

/// Dense per-article vectors of uniform dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingTable {
    pub rows: Vec<(ArticleId, Vec<f64>)>,
    pub dim: usize,
}

impl EmbeddingTable {
    /// CSV `article_id,v0,...,v{d-1}`.
    pub fn from_csv(text: &str, origin: &str) -> Result<EmbeddingTable> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = reader.headers().map_err(|e| Error::parse(origin, e))?.clone();
        if headers.get(0) != Some("article_id") || headers.len() < 2 {
            return Err(Error::parse(format!("{origin}:1"), "expected header article_id,v0,..."));
        }
        let dim = headers.len() - 1;
        let mut seen = HashSet::new();
        let mut rows = Vec::new();
        for (n, record) in reader.records().enumerate() {
            let line = n + 2;
            let record = record.map_err(|e| Error::parse(format!("{origin}:{line}"), e))?;
            let id = ArticleId::new(&record[0]);
            if !seen.insert(id.clone()) {
                return Err(Error::Validation(format!("article {id} has two embeddings")));
            }
            let values = record
                .iter()
                .skip(1)
                .map(|v| {
                    v.parse::<f64>()
                        .map_err(|e| Error::parse(format!("{origin}:{line}"), format!("{v:?}: {e}")))
                })
                .collect::<Result<Vec<f64>>>()?;
            if values.len() != dim {
                return Err(Error::Validation(format!(
                    "article {id}: {} values, expected {dim}",
                    values.len()
                )));
            }
            if values.iter().any(|v| !v.is_finite()) {
                return Err(Error::Validation(format!("article {id}: non-finite embedding entry")));
            }
            rows.push((id, values));
        }
        Ok(EmbeddingTable { rows, dim })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<EmbeddingTable> {
        let path = path.as_ref();
        EmbeddingTable::from_csv(&crate::io::read_to_string(path)?, &path.display().to_string())
    }

    /// L2-normalized vectors restricted to `articles`, which must all be present.
    pub fn unit_vectors(&self, articles: &[ArticleId]) -> Result<Vec<(ArticleId, SparseVector)>> {
        let by_id: BTreeMap<&ArticleId, &Vec<f64>> = self.rows.iter().map(|(a, v)| (a, v)).collect();
        articles
            .iter()
            .map(|a| {
                let values = by_id
                    .get(a)
                    .ok_or_else(|| Error::Validation(format!("no embedding for article {a}")))?;
                let mut v = SparseVector::from_dense(values);
                if !v.normalize() {
                    return Err(Error::Clustering(format!("article {a} has a zero embedding")));
                }
                Ok((a.clone(), v))
            })
            .collect()
    }
}
