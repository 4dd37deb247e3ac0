//! Scoring of prediction matrices: single-label metrics, rank metrics,
//! normalized entropy and the two multi-label matching protocols.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::baseline::PredictionMatrix;
use crate::clustering::PartitionMap;
use crate::error::{Error, Result};
use crate::ids::ArticleId;
use crate::querygen::{Query, QuerySet};

/// Column indices of a row by descending probability, ties by ascending
/// article id.
pub fn ranking(row: &[f64], article_ids: &[ArticleId]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..row.len()).collect();
    order.sort_by(|&a, &b| {
        row[b]
            .total_cmp(&row[a])
            .then_with(|| article_ids[a].cmp(&article_ids[b]))
    });
    order
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TopKEntropy {
    /// Top-k mass renormalized to sum 1 before the entropy.
    #[default]
    Renormalized,
    /// Entropy terms of the top-k probabilities, as they are.
    Raw,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub recall_ks: Vec<usize>,
    pub entropy_k: usize,
    pub top_k_entropy: TopKEntropy,
    /// Average R over every active class, with R_i = 0 for classes owning
    /// no query, instead of over queried classes only.
    pub include_unqueried_in_recall: bool,
    pub precision_ks: Vec<usize>,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            recall_ks: vec![3, 10],
            entropy_k: 3,
            top_k_entropy: TopKEntropy::Renormalized,
            include_unqueried_in_recall: false,
            precision_ks: vec![1, 3, 5],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Protocol {
    SingleLabel,
    ArticleDriven,
    TopicDriven,
}

impl Protocol {
    pub fn as_str(self) -> &'static str {
        match self {
            Protocol::SingleLabel => "single-label",
            Protocol::ArticleDriven => "article-driven",
            Protocol::TopicDriven => "topic-driven",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryScore {
    pub query_id: String,
    /// 1-based rank of the (first) gold article.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub gold_rank: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub top1: Option<ArticleId>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub precision: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub recall: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub f: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub entropy: Option<f64>,
}

impl QueryScore {
    fn new(query_id: &str) -> Self {
        QueryScore {
            query_id: query_id.to_string(),
            gold_rank: None,
            top1: None,
            precision: None,
            recall: None,
            f: None,
            entropy: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub protocol: Protocol,
    /// Row label in summary tables, usually the scope.
    pub portion: String,
    pub n_queries: usize,
    pub n_classes: usize,
    pub options: EvalOptions,
    pub metrics: BTreeMap<String, f64>,
    pub per_query: Vec<QueryScore>,
}

impl MetricsReport {
    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.get(name).copied()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str, origin: &str) -> Result<MetricsReport> {
        serde_json::from_str(text).map_err(|e| Error::parse(format!("{origin}:{}:{}", e.line(), e.column()), e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<MetricsReport> {
        let path = path.as_ref();
        MetricsReport::from_json(&crate::io::read_to_string(path)?, &path.display().to_string())
    }
}

fn mean(values: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, n) = values.into_iter().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Rows of `pred` aligned with `queries`, plus gold column indices.
struct Aligned<'a> {
    rows: Vec<&'a [f64]>,
    golds: Vec<Vec<usize>>,
}

fn align<'a>(pred: &'a PredictionMatrix, queries: &[Query]) -> Result<Aligned<'a>> {
    if queries.is_empty() {
        return Err(Error::Eval("no queries to score".into()));
    }
    let cols = pred.column_index();
    let rows_by_id: HashMap<&str, usize> = pred
        .query_ids
        .iter()
        .enumerate()
        .map(|(i, q)| (q.as_str(), i))
        .collect();
    let mut rows = Vec::with_capacity(queries.len());
    let mut golds = Vec::with_capacity(queries.len());
    for q in queries {
        let row = rows_by_id
            .get(q.id.as_str())
            .ok_or_else(|| Error::Eval(format!("query {} has no prediction row", q.id)))?;
        rows.push(pred.rows[*row].as_slice());
        if q.gold.is_empty() {
            return Err(Error::Eval(format!("query {} has no gold article", q.id)));
        }
        let gold = q
            .gold
            .iter()
            .map(|g| {
                cols.get(g)
                    .copied()
                    .ok_or_else(|| Error::Eval(format!("gold article {g} of query {} is not a matrix column", q.id)))
            })
            .collect::<Result<Vec<usize>>>()?;
        golds.push(gold);
    }
    Ok(Aligned { rows, golds })
}

fn require_single(queries: &[Query]) -> Result<()> {
    match queries.iter().find(|q| q.gold.len() != 1) {
        Some(q) => Err(Error::Eval(format!(
            "query {} has {} gold articles, expected one",
            q.id,
            q.gold.len()
        ))),
        None => Ok(()),
    }
}

/// `-sum p log2 p` over the given probabilities.
pub fn entropy_bits(probs: impl IntoIterator<Item = f64>) -> f64 {
    -probs
        .into_iter()
        .filter(|&p| p > 0.0)
        .map(|p| p * p.log2())
        .sum::<f64>()
}

/// Entropy of a distribution over `n` outcomes divided by `log2 n`,
/// computed as `1 - KL(p || uniform) / ln n` so a uniform row gives
/// exactly 1.
fn relative_entropy(probs: impl IntoIterator<Item = f64>, n: usize) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let nf = n as f64;
    let kl: f64 = probs.into_iter().filter(|&p| p > 0.0).map(|p| p * (p * nf).ln()).sum();
    (1.0 - kl / nf.ln()).clamp(0.0, 1.0)
}

/// Row entropy divided by `log2 N`; 0 for a single class.
pub fn normalized_entropy(row: &[f64]) -> f64 {
    relative_entropy(row.iter().copied(), row.len())
}

/// Entropy of the top-k probabilities divided by `log2 k`.
pub fn top_k_entropy(row: &[f64], order: &[usize], k: usize, mode: TopKEntropy) -> f64 {
    let k = k.min(row.len());
    if k < 2 {
        return 0.0;
    }
    let top: Vec<f64> = order[..k].iter().map(|&i| row[i]).collect();
    match mode {
        TopKEntropy::Raw => entropy_bits(top) / (k as f64).log2(),
        TopKEntropy::Renormalized => {
            let mass: f64 = top.iter().sum();
            if mass <= 0.0 {
                return 0.0;
            }
            relative_entropy(top.into_iter().map(|p| p / mass), k)
        }
    }
}

/// Fraction of queries whose gold ranks within the top `k`.
pub fn recall_at_k(pred: &PredictionMatrix, queries: &QuerySet, k: usize) -> Result<f64> {
    require_single(&queries.queries)?;
    let al = align(pred, &queries.queries)?;
    Ok(mean(al.rows.iter().zip(&al.golds).map(|(row, g)| {
        let rank = gold_rank(row, &pred.article_ids, g[0]);
        if rank <= k {
            1.0
        } else {
            0.0
        }
    })))
}

pub fn mrr(pred: &PredictionMatrix, queries: &QuerySet) -> Result<f64> {
    require_single(&queries.queries)?;
    let al = align(pred, &queries.queries)?;
    Ok(mean(
        al.rows
            .iter()
            .zip(&al.golds)
            .map(|(row, g)| 1.0 / gold_rank(row, &pred.article_ids, g[0]) as f64),
    ))
}

/// Mean normalized entropy and mean top-k entropy over the queried rows.
pub fn entropy(pred: &PredictionMatrix, queries: &QuerySet, k: usize, mode: TopKEntropy) -> Result<(f64, f64)> {
    let al = align(pred, &queries.queries)?;
    let e = mean(al.rows.iter().map(|r| normalized_entropy(r)));
    let ek = mean(
        al.rows
            .iter()
            .map(|r| top_k_entropy(r, &ranking(r, &pred.article_ids), k, mode)),
    );
    Ok((e, ek))
}

fn gold_rank(row: &[f64], article_ids: &[ArticleId], gold: usize) -> usize {
    let order = ranking(row, article_ids);
    order.iter().position(|&c| c == gold).expect("gold is a column") + 1
}

/// Top-1 class confusion metrics, rank metrics and entropy.
pub fn single_label_scores(
    pred: &PredictionMatrix,
    queries: &QuerySet,
    portion: &str,
    options: &EvalOptions,
) -> Result<MetricsReport> {
    require_single(&queries.queries)?;
    let al = align(pred, &queries.queries)?;
    let n = pred.n_classes();
    let mut predicted = vec![0usize; n];
    let mut correct = vec![0usize; n];
    let mut owned = vec![0usize; n];
    let mut per_query = Vec::with_capacity(queries.len());
    let mut ranks = Vec::with_capacity(queries.len());
    let (mut e_sum, mut ek_sum) = (0.0, 0.0);

    for ((q, row), gold) in queries.queries.iter().zip(&al.rows).zip(&al.golds) {
        let gold = gold[0];
        let order = ranking(row, &pred.article_ids);
        let top = order[0];
        predicted[top] += 1;
        owned[gold] += 1;
        if top == gold {
            correct[gold] += 1;
        }
        let rank = order.iter().position(|&c| c == gold).expect("gold is a column") + 1;
        ranks.push(rank);
        let e = normalized_entropy(row);
        e_sum += e;
        ek_sum += top_k_entropy(row, &order, options.entropy_k, options.top_k_entropy);
        let mut s = QueryScore::new(&q.id);
        s.gold_rank = Some(rank);
        s.top1 = Some(pred.article_ids[top].clone());
        s.entropy = Some(e);
        per_query.push(s);
    }

    let mut ps = Vec::new();
    let mut rs = Vec::new();
    let mut fs = Vec::new();
    for c in 0..n {
        if predicted[c] == 0 && owned[c] == 0 {
            continue;
        }
        let p = if predicted[c] == 0 {
            0.0
        } else {
            correct[c] as f64 / predicted[c] as f64
        };
        let r = if owned[c] == 0 {
            0.0
        } else {
            correct[c] as f64 / owned[c] as f64
        };
        ps.push(p);
        if owned[c] > 0 || options.include_unqueried_in_recall {
            rs.push(r);
        }
        fs.push(harmonic(p, r));
    }
    let p = mean(ps);
    let r = mean(rs);
    let nq = queries.len() as f64;

    let mut metrics = BTreeMap::new();
    metrics.insert("P".into(), p);
    metrics.insert("R".into(), r);
    metrics.insert("F_micro".into(), mean(fs));
    metrics.insert("F_macro".into(), harmonic(p, r));
    metrics.insert("accuracy".into(), correct.iter().sum::<usize>() as f64 / nq);
    for &k in &options.recall_ks {
        metrics.insert(format!("R@{k}"), ranks.iter().filter(|&&r| r <= k).count() as f64 / nq);
    }
    metrics.insert("MRR".into(), mean(ranks.iter().map(|&r| 1.0 / r as f64)));
    metrics.insert("E".into(), e_sum / nq);
    metrics.insert(format!("E@{}", options.entropy_k), ek_sum / nq);

    Ok(MetricsReport {
        protocol: Protocol::SingleLabel,
        portion: portion.to_string(),
        n_queries: queries.len(),
        n_classes: n,
        options: options.clone(),
        metrics,
        per_query,
    })
}

fn set_scores(order: &[usize], relevant: &HashSet<usize>) -> (f64, f64, f64) {
    let hits = order[..relevant.len()].iter().filter(|c| relevant.contains(c)).count() as f64;
    let p = hits / relevant.len() as f64;
    let r = hits / relevant.len() as f64;
    (p, r, harmonic(p, r))
}

fn multilabel_report(
    protocol: Protocol,
    portion: &str,
    n_classes: usize,
    options: &EvalOptions,
    per_query: Vec<QueryScore>,
    mut extra: BTreeMap<String, f64>,
) -> MetricsReport {
    let p = mean(per_query.iter().filter_map(|s| s.precision));
    let r = mean(per_query.iter().filter_map(|s| s.recall));
    extra.insert("P".into(), p);
    extra.insert("R".into(), r);
    extra.insert("F_micro".into(), mean(per_query.iter().filter_map(|s| s.f)));
    extra.insert("F_macro".into(), harmonic(p, r));
    MetricsReport {
        protocol,
        portion: portion.to_string(),
        n_queries: per_query.len(),
        n_classes,
        options: options.clone(),
        metrics: extra,
        per_query,
    }
}

/// Relevant set = the partition holding the query's gold article, matched
/// against the top-|partition| predictions.
pub fn multilabel_article_driven(
    pred: &PredictionMatrix,
    queries: &QuerySet,
    partition: &PartitionMap,
    portion: &str,
    options: &EvalOptions,
) -> Result<MetricsReport> {
    require_single(&queries.queries)?;
    let al = align(pred, &queries.queries)?;
    let cols = pred.column_index();
    let mut members: HashMap<&str, HashSet<usize>> = HashMap::new();
    for (article, part) in &partition.assignments {
        let col = cols
            .get(article)
            .ok_or_else(|| Error::Eval(format!("partition article {article} is not a matrix column")))?;
        members.entry(part.as_str()).or_default().insert(*col);
    }
    let mut per_query = Vec::with_capacity(queries.len());
    let mut sizes = Vec::with_capacity(queries.len());
    for (q, row) in queries.queries.iter().zip(&al.rows) {
        let gold = &q.gold[0];
        let part = partition
            .partition_of(gold)
            .ok_or_else(|| Error::Eval(format!("gold article {gold} of query {} is in no partition", q.id)))?;
        let relevant = &members[part];
        let (p, r, f) = set_scores(&ranking(row, &pred.article_ids), relevant);
        sizes.push(relevant.len() as f64);
        let mut s = QueryScore::new(&q.id);
        s.precision = Some(p);
        s.recall = Some(r);
        s.f = Some(f);
        per_query.push(s);
    }
    let mut extra = BTreeMap::new();
    extra.insert("a_cs".into(), mean(sizes));
    Ok(multilabel_report(
        Protocol::ArticleDriven,
        portion,
        pred.n_classes(),
        options,
        per_query,
        extra,
    ))
}

/// Gold set of n articles matched against the top-n predictions, plus P@k.
pub fn multilabel_topic_driven(
    pred: &PredictionMatrix,
    queries: &QuerySet,
    portion: &str,
    options: &EvalOptions,
) -> Result<MetricsReport> {
    let n = pred.n_classes();
    if let Some(k) = options.precision_ks.iter().find(|&&k| k == 0 || k > n) {
        return Err(Error::Eval(format!("P@{k} needs 1 <= k <= {n}")));
    }
    let al = align(pred, &queries.queries)?;
    let mut per_query = Vec::with_capacity(queries.len());
    let mut at_k = vec![0.0; options.precision_ks.len()];
    let mut sizes = Vec::with_capacity(queries.len());
    for ((q, row), gold) in queries.queries.iter().zip(&al.rows).zip(&al.golds) {
        let relevant: HashSet<usize> = gold.iter().copied().collect();
        if relevant.len() != gold.len() {
            return Err(Error::Eval(format!("query {} repeats a gold article", q.id)));
        }
        let order = ranking(row, &pred.article_ids);
        let (p, r, f) = set_scores(&order, &relevant);
        for (acc, &k) in at_k.iter_mut().zip(&options.precision_ks) {
            *acc += order[..k].iter().filter(|c| relevant.contains(c)).count() as f64 / k as f64;
        }
        sizes.push(relevant.len() as f64);
        let mut s = QueryScore::new(&q.id);
        s.precision = Some(p);
        s.recall = Some(r);
        s.f = Some(f);
        per_query.push(s);
    }
    let nq = queries.len() as f64;
    let mut extra = BTreeMap::new();
    for (acc, &k) in at_k.iter().zip(&options.precision_ks) {
        extra.insert(format!("P@{k}"), acc / nq);
    }
    extra.insert("a_cs".into(), mean(sizes));
    Ok(multilabel_report(
        Protocol::TopicDriven,
        portion,
        n,
        options,
        per_query,
        extra,
    ))
}

fn column_key(name: &str) -> (u8, usize, String) {
    let group = |prefix: &str| name.strip_prefix(prefix).and_then(|k| k.parse::<usize>().ok());
    let fixed = ["accuracy", "P", "R", "F_micro", "F_macro"];
    if let Some(i) = fixed.iter().position(|f| *f == name) {
        return (0, i, String::new());
    }
    if let Some(k) = group("R@") {
        return (1, k, String::new());
    }
    if name == "MRR" {
        return (2, 0, String::new());
    }
    if name == "E" {
        return (3, 0, String::new());
    }
    if let Some(k) = group("E@") {
        return (4, k, String::new());
    }
    if let Some(k) = group("P@") {
        return (5, k, String::new());
    }
    if name == "a_cs" {
        return (6, 0, String::new());
    }
    (7, 0, name.to_string())
}

/// One table per protocol: portions as rows, criteria as columns, values
/// at four decimals. Tables are separated by a blank line.
pub fn summary_csv(reports: &[MetricsReport]) -> String {
    let mut by_protocol: BTreeMap<&str, Vec<&MetricsReport>> = BTreeMap::new();
    for r in reports {
        by_protocol.entry(r.protocol.as_str()).or_default().push(r);
    }
    let mut out = String::new();
    for (protocol, rows) in by_protocol {
        let mut columns: Vec<&str> = rows
            .iter()
            .flat_map(|r| r.metrics.keys().map(String::as_str))
            .collect::<HashSet<_>>()
            .into_iter()
            .collect();
        columns.sort_by_key(|c| column_key(c));
        if !out.is_empty() {
            out.push('\n');
        }
        out.push_str("protocol,portion");
        for c in &columns {
            let _ = write!(out, ",{c}");
        }
        out.push('\n');
        for r in rows {
            let _ = write!(out, "{protocol},{}", r.portion);
            for c in &columns {
                match r.metric(c) {
                    Some(v) => {
                        let _ = write!(out, ",{v:.4}");
                    }
                    None => out.push(','),
                }
            }
            out.push('\n');
        }
    }
    out
}
