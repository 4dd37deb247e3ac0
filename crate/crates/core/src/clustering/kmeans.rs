//! Bisecting spherical k-means.
//!
//! Starting from a single cluster, the largest cluster is split in two with
//! spherical 2-means (cosine similarity, centroids renormalized every
//! iteration) until `k` clusters exist. Each split keeps the best of
//! `n_trials` seeded restarts by total cohesion `sum cos(item, centroid)`.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::sparse::SparseVector;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KMeansConfig {
    pub k: usize,
    pub seed: u64,
    pub n_trials: usize,
    pub max_iter: usize,
    /// Items sampled when picking the two initial centroids.
    pub init_sample: usize,
}

impl KMeansConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        KMeansConfig {
            k,
            seed,
            n_trials: 5,
            max_iter: 100,
            init_sample: 10,
        }
    }
}

/// Diagnostics of one bisection.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SplitTrace {
    pub cluster_size: usize,
    /// Cohesion after every centroid update, one sequence per trial.
    pub trials: Vec<Vec<f64>>,
    /// Index of the kept trial.
    pub chosen: usize,
}

struct TwoMeans {
    assign: Vec<u8>,
    trace: Vec<f64>,
}

const UNIT_NORM_TOLERANCE: f64 = 1e-6;

/// Clusters unit vectors into `k` groups. Returns a cluster index per item
/// (clusters numbered by creation order) and one trace per split.
pub fn bisect(items: &[&SparseVector], config: &KMeansConfig) -> Result<(Vec<usize>, Vec<SplitTrace>)> {
    let n = items.len();
    if config.k == 0 || config.k > n {
        return Err(Error::Clustering(format!("k = {} must be in 1..={n}", config.k)));
    }
    if config.n_trials == 0 || config.max_iter == 0 {
        return Err(Error::Clustering("n_trials and max_iter must be positive".into()));
    }
    if let Some(i) = items.iter().position(|v| (v.norm() - 1.0).abs() > UNIT_NORM_TOLERANCE) {
        return Err(Error::Clustering(format!("item {i} is not a unit vector")));
    }
    let dim = items.iter().map(|v| v.dim_hint()).max().unwrap_or(0);

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut clusters: Vec<Vec<usize>> = vec![(0..n).collect()];
    let mut traces = Vec::with_capacity(config.k - 1);
    while clusters.len() < config.k {
        // Largest cluster; the earliest one on ties.
        let target = clusters
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.len().cmp(&b.1.len()).then(b.0.cmp(&a.0)))
            .map(|(i, _)| i)
            .expect("at least one cluster");
        let members = std::mem::take(&mut clusters[target]);
        let vectors: Vec<&SparseVector> = members.iter().map(|&i| items[i]).collect();

        let mut best: Option<(usize, TwoMeans)> = None;
        let mut trials = Vec::with_capacity(config.n_trials);
        for t in 0..config.n_trials {
            let run = two_means(&vectors, dim, config, &mut rng);
            let score = *run.trace.last().expect("non-empty trace");
            trials.push(run.trace.clone());
            if best.as_ref().is_none_or(|(_, b)| score > *b.trace.last().unwrap()) {
                best = Some((t, run));
            }
        }
        let (chosen, split) = best.expect("n_trials > 0");
        let side = |s: u8| -> Vec<usize> {
            members
                .iter()
                .zip(&split.assign)
                .filter(|(_, &a)| a == s)
                .map(|(&i, _)| i)
                .collect()
        };
        let (left, right) = (side(0), side(1));
        clusters[target] = left;
        clusters.push(right);
        traces.push(SplitTrace {
            cluster_size: members.len(),
            trials,
            chosen,
        });
    }

    let mut labels = vec![0; n];
    for (c, members) in clusters.iter().enumerate() {
        for &i in members {
            labels[i] = c;
        }
    }
    Ok((labels, traces))
}

fn two_means(vectors: &[&SparseVector], dim: usize, config: &KMeansConfig, rng: &mut ChaCha8Rng) -> TwoMeans {
    let m = vectors.len();
    debug_assert!(m >= 2);

    // Seeds: the least similar pair within a random sample.
    let picked = sample(rng, m, config.init_sample.min(m).max(2)).into_vec();
    let mut seeds = (picked[0], picked[1]);
    let mut lowest = f64::INFINITY;
    for (a, &i) in picked.iter().enumerate() {
        for &j in &picked[a + 1..] {
            let cos = vectors[i].dot(vectors[j]);
            if cos < lowest {
                lowest = cos;
                seeds = (i, j);
            }
        }
    }
    let mut centroids = [dense(vectors[seeds.0], dim), dense(vectors[seeds.1], dim)];

    let mut assign = assignment(vectors, &centroids);
    let mut trace = Vec::new();
    for iter in 0..config.max_iter {
        update_centroids(vectors, &assign, &mut centroids);
        trace.push(cohesion(vectors, &assign, &centroids));
        let next = assignment(vectors, &centroids);
        if next == assign || iter + 1 == config.max_iter {
            break;
        }
        assign = next;
    }
    TwoMeans { assign, trace }
}

fn dense(v: &SparseVector, dim: usize) -> Vec<f64> {
    let mut d = vec![0.0; dim];
    v.add_to_dense(&mut d);
    d
}

/// Nearest centroid by cosine, lower index on ties. If every item lands on
/// one side, the item least similar to that centroid moves to the other.
fn assignment(vectors: &[&SparseVector], centroids: &[Vec<f64>; 2]) -> Vec<u8> {
    let sims: Vec<[f64; 2]> = vectors
        .iter()
        .map(|v| [v.dot_dense(&centroids[0]), v.dot_dense(&centroids[1])])
        .collect();
    let mut assign: Vec<u8> = sims.iter().map(|s| u8::from(s[1] > s[0])).collect();
    for side in [0u8, 1] {
        if assign.iter().all(|&a| a == side) {
            let worst = (0..assign.len())
                .min_by(|&a, &b| sims[a][side as usize].total_cmp(&sims[b][side as usize]))
                .expect("non-empty");
            assign[worst] = 1 - side;
        }
    }
    assign
}

/// Normalized member sums; a centroid whose sum vanishes keeps its old value.
fn update_centroids(vectors: &[&SparseVector], assign: &[u8], centroids: &mut [Vec<f64>; 2]) {
    for (side, centroid) in centroids.iter_mut().enumerate() {
        let mut sum = vec![0.0; centroid.len()];
        for (v, _) in vectors.iter().zip(assign).filter(|(_, a)| **a as usize == side) {
            v.add_to_dense(&mut sum);
        }
        let norm = sum.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            *centroid = sum.into_iter().map(|x| x / norm).collect();
        }
    }
}

fn cohesion(vectors: &[&SparseVector], assign: &[u8], centroids: &[Vec<f64>; 2]) -> f64 {
    vectors
        .iter()
        .zip(assign)
        .map(|(v, &a)| v.dot_dense(&centroids[a as usize]))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn axis(dim: usize, axis: usize, jitter: f64) -> SparseVector {
        let mut d = vec![0.0; dim];
        d[axis] = 1.0;
        d[(axis + 1) % dim] = jitter;
        let mut v = SparseVector::from_dense(&d);
        v.normalize();
        v
    }

    #[test]
    fn k_one_is_a_single_cluster() {
        let vs: Vec<SparseVector> = (0..4).map(|i| axis(3, i % 3, 0.0)).collect();
        let refs: Vec<&SparseVector> = vs.iter().collect();
        let (labels, traces) = bisect(&refs, &KMeansConfig::new(1, 0)).unwrap();
        assert_eq!(labels, vec![0; 4]);
        assert!(traces.is_empty());
    }

    #[test]
    fn identical_vectors_still_split() {
        let vs: Vec<SparseVector> = (0..5).map(|_| axis(2, 0, 0.0)).collect();
        let refs: Vec<&SparseVector> = vs.iter().collect();
        let (labels, _) = bisect(&refs, &KMeansConfig::new(3, 9)).unwrap();
        let mut sizes = [0; 3];
        for l in labels {
            sizes[l] += 1;
        }
        assert!(sizes.iter().all(|&s| s > 0));
    }

    #[test]
    fn rejects_bad_input() {
        let v = axis(2, 0, 0.0);
        assert!(bisect(&[&v], &KMeansConfig::new(2, 0)).is_err());
        assert!(bisect(&[&v], &KMeansConfig::new(0, 0)).is_err());
        let z = SparseVector::default();
        assert!(bisect(&[&v, &z], &KMeansConfig::new(1, 0)).is_err());
    }

    #[test]
    fn cohesion_never_decreases() {
        let vs: Vec<SparseVector> = (0..40)
            .map(|i| {
                let d: Vec<f64> = (0..6).map(|j| (((i * 7 + j * 13) % 11) as f64) + 0.1).collect();
                let mut v = SparseVector::from_dense(&d);
                v.normalize();
                v
            })
            .collect();
        let refs: Vec<&SparseVector> = vs.iter().collect();
        let (_, traces) = bisect(&refs, &KMeansConfig::new(6, 3)).unwrap();
        assert_eq!(traces.len(), 5);
        for t in &traces {
            for trial in &t.trials {
                for w in trial.windows(2) {
                    assert!(w[1] >= w[0] - 1e-12, "{trial:?}");
                }
            }
        }
    }
}
