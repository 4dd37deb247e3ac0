use std::path::{Path, PathBuf};

use anyhow::{bail, Result};

use statute_core::attributes::{attribute_vectors, attribute_vectors_csv, build_attribute_schema};
use statute_core::baseline::{train_baseline, CentroidModel, PredictionMatrix};
use statute_core::clustering::{
    bisecting_spherical_kmeans_traced, choose_k, icc_partition, tfidf_article_vectors, EmbeddingTable, KMeansConfig,
    PartitionMap, PartitionSource,
};
use statute_core::corpus::{corpus_stats, parse_corpus_str, stats_csv, Corpus, Level};
use statute_core::eval::{
    multilabel_article_driven, multilabel_topic_driven, single_label_scores, summary_csv, MetricsReport,
};
use statute_core::io::{from_jsonl, parse_term_list, to_jsonl};
use statute_core::labeling::{generate_training_set, training_file_name, TrainingUnit};
use statute_core::querygen::{
    gen_qtype1, gen_qtype2, gen_qtype6, ingest_cases_str, ingest_comments_str, CommandParaphraser, QuerySet, Sampling,
};
use statute_core::vocab::{default_stopwords, select_injection_terms, stopword_set, BaseVocabulary};
use statute_core::Error;

use crate::config::RunConfig;
use crate::output::Run;

const DEFAULT_PER_ARTICLE: usize = 2;
const DEFAULT_DF_CEILING: f64 = 0.5;
const DEFAULT_CLUSTER_SIZE: f64 = 3.0;
const DEFAULT_CONCURRENCY: usize = 4;

fn config_error(message: impl Into<String>) -> anyhow::Error {
    Error::Config(message.into()).into()
}

fn required<'a, T>(value: &'a Option<T>, flag: &str) -> Result<&'a T> {
    value
        .as_ref()
        .ok_or_else(|| config_error(format!("--{flag} is required")))
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Corpus restricted to the configured scope.
fn load_corpus(run: &mut Run, config: &RunConfig) -> Result<Corpus> {
    let path = required(&config.corpus, "corpus")?;
    let text = run.input_text(path)?;
    let corpus = parse_corpus_str(&text, &path.display().to_string())?;
    Ok(corpus.restrict(config.scope())?)
}

fn load_queries(run: &mut Run, path: &Path) -> Result<QuerySet> {
    let text = run.input_text(path)?;
    Ok(QuerySet::from_jsonl(&text, &path.display().to_string())?)
}

fn load_matrix(run: &mut Run, config: &RunConfig) -> Result<PredictionMatrix> {
    let path = required(&config.predictions, "predictions")?;
    let text = run.input_text(path)?;
    Ok(PredictionMatrix::from_csv(&text, &path.display().to_string(), None)?)
}

pub fn ingest(run: &mut Run, config: &RunConfig) -> Result<()> {
    let corpus = load_corpus(run, config)?;
    run.output(
        &format!("corpus_{}.json", config.scope().file_stem()),
        corpus.to_json() + "\n",
    )?;
    Ok(())
}

pub fn stats(run: &mut Run, config: &RunConfig) -> Result<()> {
    let corpus = load_corpus(run, config)?;
    run.output(
        &format!("stats_{}.csv", config.scope().file_stem()),
        stats_csv(&corpus_stats(&corpus)?),
    )?;
    Ok(())
}

pub fn vocab(run: &mut Run, config: &RunConfig) -> Result<()> {
    let corpus = load_corpus(run, config)?;
    let base_path = required(&config.base_vocab, "base-vocab")?;
    let base = BaseVocabulary::from_entries(parse_term_list(&run.input_text(base_path)?));
    let stopwords = match &config.stopwords {
        Some(p) => stopword_set(parse_term_list(&run.input_text(p)?)),
        None => default_stopwords(),
    };
    let report = select_injection_terms(
        &corpus,
        &base,
        &stopwords,
        config.df_ceiling.unwrap_or(DEFAULT_DF_CEILING),
    )?;
    let json = serde_json::to_string_pretty(&report)? + "\n";
    run.output(&format!("injection_{}.json", config.scope().file_stem()), json)?;
    Ok(())
}

pub fn make_training(run: &mut Run, config: &RunConfig) -> Result<()> {
    let corpus = load_corpus(run, config)?;
    let set = generate_training_set(&corpus, config.scope(), &config.labeling())?;
    run.output(&set.file_name(), set.to_jsonl())?;
    Ok(())
}

pub fn make_queries(run: &mut Run, config: &RunConfig) -> Result<()> {
    let corpus = load_corpus(run, config)?;
    let scope = config.scope();
    let stem = scope.file_stem();
    let qtypes = config.qtypes.clone().unwrap_or_else(|| vec![1]);
    if let Some(t) = qtypes.iter().find(|t| !(1..=6).contains(*t)) {
        bail!(config_error(format!("unknown query type {t}")));
    }
    let sampling = match (config.rate, config.per_article) {
        (Some(_), Some(_)) => bail!(config_error("--rate and --per-article are exclusive")),
        (Some(r), None) => Sampling::Rate(r),
        (None, n) => Sampling::PerArticle(n.unwrap_or(DEFAULT_PER_ARTICLE)),
    };
    let needs_q1 = qtypes.contains(&1) || qtypes.contains(&2);
    let q1 = if needs_q1 {
        Some(gen_qtype1(&corpus, scope, sampling, config.seed())?)
    } else {
        None
    };
    if let (true, Some(q1)) = (qtypes.contains(&1), &q1) {
        run.output(&format!("queries_{stem}_q1.jsonl"), q1.to_jsonl())?;
    }
    if let (true, Some(q1)) = (qtypes.contains(&2), &q1) {
        let command = required(&config.paraphrase_command, "paraphrase-command")?;
        let hook = CommandParaphraser::from_command_line(command)
            .ok_or_else(|| config_error("--paraphrase-command is empty"))?;
        let (q2, skips) = gen_qtype2(q1, &hook, config.concurrency.unwrap_or(DEFAULT_CONCURRENCY));
        run.output(&format!("queries_{stem}_q2.jsonl"), q2.to_jsonl())?;
        run.output(&format!("skips_{stem}_q2.jsonl"), to_jsonl(&skips))?;
    }
    if qtypes.contains(&3) || qtypes.contains(&4) {
        let path = required(&config.comments, "comments")?;
        let text = run.input_text(path)?;
        let (q3, q4) = ingest_comments_str(&text, &path.display().to_string(), &corpus, scope)?;
        if qtypes.contains(&3) {
            run.output(&format!("queries_{stem}_q3.jsonl"), q3.to_jsonl())?;
        }
        if qtypes.contains(&4) {
            run.output(&format!("queries_{stem}_q4.jsonl"), q4.to_jsonl())?;
        }
    }
    if qtypes.contains(&5) {
        let path = required(&config.cases, "cases")?;
        let text = run.input_text(path)?;
        let q5 = ingest_cases_str(&text, &path.display().to_string(), &corpus, scope)?;
        run.output(&format!("queries_{stem}_q5.jsonl"), q5.to_jsonl())?;
    }
    if qtypes.contains(&6) {
        let level = config.level.unwrap_or(Level::Chapter);
        let q6 = gen_qtype6(&corpus, level);
        run.output(&format!("queries_{stem}_q6_{}.jsonl", level.as_str()), q6.to_jsonl())?;
    }
    Ok(())
}

fn training_path(config: &RunConfig) -> PathBuf {
    config.training.clone().unwrap_or_else(|| {
        config
            .out_dir()
            .join(training_file_name(config.scope(), &config.labeling()))
    })
}

fn model_path(config: &RunConfig) -> PathBuf {
    config.model.clone().unwrap_or_else(|| {
        let training = training_path(config);
        config.out_dir().join(format!("baseline_{}.json", stem(&training)))
    })
}

pub fn train_baseline_cmd(run: &mut Run, config: &RunConfig) -> Result<()> {
    let path = training_path(config);
    let text = run.input_text(&path)?;
    let units: Vec<TrainingUnit> = from_jsonl(&text, &path.display().to_string())?;
    let model = train_baseline(&units)?;
    run.output(&format!("baseline_{}.json", stem(&path)), model.to_json() + "\n")?;
    Ok(())
}

pub fn predict(run: &mut Run, config: &RunConfig) -> Result<()> {
    let path = model_path(config);
    let text = run.input_text(&path)?;
    let model = CentroidModel::from_json(&text, &path.display().to_string())?;
    let queries_path = required(&config.queries, "queries")?;
    let queries = load_queries(run, queries_path)?;
    let matrix = model.predict_set(&queries)?;
    run.output(&format!("predictions_{}.csv", stem(queries_path)), matrix.to_csv())?;
    Ok(())
}

/// Validates an external prediction file against the scope's articles and
/// rewrites it in canonical form.
pub fn load_predictions(run: &mut Run, config: &RunConfig) -> Result<()> {
    let expected = match &config.corpus {
        Some(_) => Some(load_corpus(run, config)?.article_ids()),
        None => None,
    };
    let path = required(&config.predictions, "predictions")?;
    let text = run.input_text(path)?;
    let matrix = PredictionMatrix::from_csv(&text, &path.display().to_string(), expected.as_deref())?;
    run.output(&format!("checked_{}.csv", stem(path)), matrix.to_csv())?;
    Ok(())
}

pub fn cluster(run: &mut Run, config: &RunConfig) -> Result<()> {
    let corpus = load_corpus(run, config)?;
    let (vectors, source, tag) = match &config.embeddings {
        Some(path) => {
            let text = run.input_text(path)?;
            let table = EmbeddingTable::from_csv(&text, &path.display().to_string())?;
            (
                table.unit_vectors(&corpus.article_ids())?,
                PartitionSource::ClusteringEmbeddings,
                "embeddings",
            )
        }
        None => (
            tfidf_article_vectors(&corpus),
            PartitionSource::ClusteringTfidf,
            "tfidf",
        ),
    };
    let k = match config.k {
        Some(k) => k,
        None => choose_k(
            vectors.len(),
            config.target_cluster_size.unwrap_or(DEFAULT_CLUSTER_SIZE),
        ),
    };
    let kconfig = KMeansConfig::new(k, config.seed());
    let (partition, traces) = bisecting_spherical_kmeans_traced(&vectors, config.scope(), source, &kconfig)?;
    let stem = config.scope().file_stem();
    run.output(&format!("partition_{stem}_{tag}.csv"), partition.to_csv())?;
    run.output(
        &format!("cluster_trace_{stem}_{tag}.json"),
        serde_json::to_string_pretty(&traces)? + "\n",
    )?;
    Ok(())
}

pub fn icc_partition_cmd(run: &mut Run, config: &RunConfig) -> Result<()> {
    let corpus = load_corpus(run, config)?;
    let partition = icc_partition(&corpus);
    run.output(
        &format!("partition_{}_icc.csv", config.scope().file_stem()),
        partition.to_csv(),
    )?;
    Ok(())
}

pub fn attributes(run: &mut Run, config: &RunConfig) -> Result<()> {
    let corpus = load_corpus(run, config)?;
    let mut books = corpus.books();
    books.sort_unstable();
    for book in books {
        let schema = build_attribute_schema(&corpus, book, config.attribute_mode())?;
        let vectors = attribute_vectors(&corpus, &schema)?;
        run.output(&format!("attributes_book{book}.json"), schema.to_json() + "\n")?;
        run.output(
            &format!("attribute_vectors_book{book}.csv"),
            attribute_vectors_csv(&schema, &vectors),
        )?;
    }
    Ok(())
}

fn write_report(run: &mut Run, tag: &str, queries_path: &Path, report: &MetricsReport) -> Result<()> {
    let name = format!("metrics_{tag}_{}", stem(queries_path));
    run.output(&format!("{name}.json"), report.to_json() + "\n")?;
    run.output(&format!("{name}.csv"), summary_csv(std::slice::from_ref(report)))?;
    Ok(())
}

pub fn eval_single(run: &mut Run, config: &RunConfig) -> Result<()> {
    let matrix = load_matrix(run, config)?;
    let queries_path = required(&config.queries, "queries")?;
    let queries = load_queries(run, queries_path)?;
    let report = single_label_scores(&matrix, &queries, &config.scope().to_string(), &config.eval_options())?;
    write_report(run, "single", queries_path, &report)
}

pub fn eval_multilabel(run: &mut Run, config: &RunConfig) -> Result<()> {
    let matrix = load_matrix(run, config)?;
    let queries_path = required(&config.queries, "queries")?;
    let queries = load_queries(run, queries_path)?;
    let partition_path = required(&config.partition, "partition")?;
    let text = run.input_text(partition_path)?;
    let partition = PartitionMap::from_csv(
        &text,
        &partition_path.display().to_string(),
        config.scope(),
        PartitionSource::IccClassification,
    )?;
    let report = multilabel_article_driven(
        &matrix,
        &queries,
        &partition,
        &config.scope().to_string(),
        &config.eval_options(),
    )?;
    write_report(run, &format!("article_{}", stem(partition_path)), queries_path, &report)
}

pub fn eval_topic(run: &mut Run, config: &RunConfig) -> Result<()> {
    let matrix = load_matrix(run, config)?;
    let queries_path = required(&config.queries, "queries")?;
    let queries = load_queries(run, queries_path)?;
    let report = multilabel_topic_driven(&matrix, &queries, &config.scope().to_string(), &config.eval_options())?;
    write_report(run, "topic", queries_path, &report)
}

/// Joins metric reports into one summary table per protocol. Without
/// `--reports`, every `metrics_*.json` in the output directory is used.
pub fn report(run: &mut Run, config: &RunConfig) -> Result<()> {
    let paths = match &config.reports {
        Some(paths) => paths.clone(),
        None => {
            let mut found: Vec<PathBuf> = std::fs::read_dir(run.out_dir())
                .map_err(|e| Error::Io {
                    path: run.out_dir().to_path_buf(),
                    source: e,
                })?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| {
                    let name = p
                        .file_name()
                        .map(|n| n.to_string_lossy().into_owned())
                        .unwrap_or_default();
                    name.starts_with("metrics_") && name.ends_with(".json")
                })
                .collect();
            found.sort();
            found
        }
    };
    if paths.is_empty() {
        bail!(Error::Empty("no metric reports to join".into()));
    }
    let mut reports = Vec::with_capacity(paths.len());
    for path in &paths {
        let text = run.input_text(path)?;
        reports.push(MetricsReport::from_json(&text, &path.display().to_string())?);
    }
    run.output("summary.csv", summary_csv(&reports))?;
    Ok(())
}
