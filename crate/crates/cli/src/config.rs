use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::{Deserialize, Serialize};

use statute_core::attributes::AttributeMode;
use statute_core::corpus::Level;
use statute_core::eval::{EvalOptions, TopKEntropy};
use statute_core::labeling::{LabelingConfig, Scheme};
use statute_core::Scope;

/// Run settings. Every field can come from the JSON config file or from
/// the matching flag; flags win.
#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Corpus JSON file.
    #[arg(long, global = true)]
    pub corpus: Option<PathBuf>,
    /// `all` or `book:N`.
    #[arg(long, global = true)]
    pub scope: Option<Scope>,
    #[arg(long, global = true)]
    pub scheme: Option<Scheme>,
    #[arg(long, global = true)]
    pub min_tu: Option<usize>,
    #[arg(long, global = true)]
    pub m: Option<usize>,
    #[arg(long, global = true)]
    pub mean_s: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Number of clusters; overrides the mean-size rule.
    #[arg(long, global = true)]
    pub k: Option<usize>,
    #[arg(long, global = true)]
    pub target_cluster_size: Option<f64>,
    /// Query types to generate, e.g. `1,2,6`.
    #[arg(long, global = true, value_delimiter = ',')]
    pub qtypes: Option<Vec<u8>>,
    /// Query-type-1 sentences per article.
    #[arg(long, global = true)]
    pub per_article: Option<usize>,
    /// Query-type-1 sampling rate; replaces the per-article count.
    #[arg(long, global = true)]
    pub rate: Option<f64>,
    /// Paraphrase command for query type 2 (text on stdin, paraphrase on stdout).
    #[arg(long, global = true)]
    pub paraphrase_command: Option<String>,
    #[arg(long, global = true)]
    pub concurrency: Option<usize>,
    #[arg(long, global = true)]
    pub comments: Option<PathBuf>,
    #[arg(long, global = true)]
    pub cases: Option<PathBuf>,
    #[arg(long, global = true)]
    pub embeddings: Option<PathBuf>,
    #[arg(long, global = true)]
    pub base_vocab: Option<PathBuf>,
    #[arg(long, global = true)]
    pub stopwords: Option<PathBuf>,
    #[arg(long, global = true)]
    pub df_ceiling: Option<f64>,
    #[arg(long, global = true)]
    pub training: Option<PathBuf>,
    #[arg(long, global = true)]
    pub model: Option<PathBuf>,
    #[arg(long, global = true)]
    pub queries: Option<PathBuf>,
    #[arg(long, global = true)]
    pub predictions: Option<PathBuf>,
    #[arg(long, global = true)]
    pub partition: Option<PathBuf>,
    #[arg(long, global = true)]
    pub level: Option<Level>,
    /// Metric reports joined by `report`.
    #[arg(long, global = true, value_delimiter = ',')]
    pub reports: Option<Vec<PathBuf>>,
    /// Merge division nodes that share a heading into one attribute.
    #[arg(long, global = true)]
    pub merge_headings: Option<bool>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub recall_ks: Option<Vec<usize>>,
    #[arg(long, global = true, value_delimiter = ',')]
    pub precision_ks: Option<Vec<usize>>,
    #[arg(long, global = true)]
    pub entropy_k: Option<usize>,
    /// Top-k entropy over the raw truncated probabilities.
    #[arg(long, global = true)]
    pub raw_top_k_entropy: Option<bool>,
    /// Count classes without queries as R_i = 0 in the recall mean.
    #[arg(long, global = true)]
    pub include_unqueried_recall: Option<bool>,
    /// Not part of the manifest config hash.
    #[serde(skip_serializing)]
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
}

macro_rules! overlay {
    ($base:ident, $top:ident, $($field:ident),* $(,)?) => {
        $( if $top.$field.is_some() { $base.$field = $top.$field; } )*
    };
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| statute_core::Error::Config(format!("{}: {e}", path.display())).into())
    }

    /// `self` with every field set in `flags` replaced.
    pub fn overlaid(mut self, flags: RunConfig) -> RunConfig {
        overlay!(
            self,
            flags,
            corpus,
            scope,
            scheme,
            min_tu,
            m,
            mean_s,
            seed,
            k,
            target_cluster_size,
            qtypes,
            per_article,
            rate,
            paraphrase_command,
            concurrency,
            comments,
            cases,
            embeddings,
            base_vocab,
            stopwords,
            df_ceiling,
            training,
            model,
            queries,
            predictions,
            partition,
            level,
            reports,
            merge_headings,
            recall_ks,
            precision_ks,
            entropy_k,
            raw_top_k_entropy,
            include_unqueried_recall,
            out_dir,
        );
        self
    }

    /// Referenced input files must exist.
    pub fn validate(&self) -> Result<()> {
        let paths = [
            ("corpus", &self.corpus),
            ("comments", &self.comments),
            ("cases", &self.cases),
            ("embeddings", &self.embeddings),
            ("base-vocab", &self.base_vocab),
            ("stopwords", &self.stopwords),
            ("training", &self.training),
            ("model", &self.model),
            ("queries", &self.queries),
            ("predictions", &self.predictions),
            ("partition", &self.partition),
        ];
        for (name, path) in paths {
            if let Some(p) = path {
                if !p.is_file() {
                    bail!(statute_core::Error::Config(format!(
                        "--{name} {} does not exist",
                        p.display()
                    )));
                }
            }
        }
        for p in self.reports.iter().flatten() {
            if !p.is_file() {
                bail!(statute_core::Error::Config(format!(
                    "report {} does not exist",
                    p.display()
                )));
            }
        }
        self.labeling().validate()?;
        Ok(())
    }

    pub fn scope(&self) -> Scope {
        self.scope.unwrap_or(Scope::Whole)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out_dir.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    pub fn labeling(&self) -> LabelingConfig {
        let mut config = LabelingConfig::new(self.scheme.unwrap_or(Scheme::UniRrEmphT));
        config.min_tu = self.min_tu.unwrap_or(config.min_tu);
        config.m = self.m.unwrap_or(config.m);
        config.mean_s = self.mean_s.unwrap_or(config.mean_s);
        config
    }

    pub fn attribute_mode(&self) -> AttributeMode {
        if self.merge_headings.unwrap_or(false) {
            AttributeMode::UniqueHeading
        } else {
            AttributeMode::PerNode
        }
    }

    pub fn eval_options(&self) -> EvalOptions {
        let mut options = EvalOptions::default();
        if let Some(ks) = &self.recall_ks {
            options.recall_ks = ks.clone();
        }
        if let Some(ks) = &self.precision_ks {
            options.precision_ks = ks.clone();
        }
        options.entropy_k = self.entropy_k.unwrap_or(options.entropy_k);
        if self.raw_top_k_entropy.unwrap_or(false) {
            options.top_k_entropy = TopKEntropy::Raw;
        }
        options.include_unqueried_in_recall = self.include_unqueried_recall.unwrap_or(false);
        options
    }
}
