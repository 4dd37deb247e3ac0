mod commands;
mod config;
mod output;

use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use config::RunConfig;
use output::Run;

#[derive(Parser)]
#[command(name = "statute", version, about = "Statute article retrieval pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    config: Option<std::path::PathBuf>,
    #[command(flatten)]
    flags: RunConfig,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Normalize and validate the corpus, write it back as JSON.
    Ingest,
    /// Per-book article, sentence and word statistics.
    Stats,
    /// Select domain terms to inject into a base vocabulary.
    Vocab,
    /// Generate a labeled training set.
    MakeTraining,
    /// Generate or ingest query sets.
    MakeQueries,
    /// Fit the nearest-centroid TF-IDF baseline.
    TrainBaseline,
    /// Score a query set with the baseline.
    Predict,
    /// Validate an external prediction matrix.
    LoadPredictions,
    /// Partition articles with bisecting spherical k-means.
    Cluster,
    /// Partition articles by their division.
    IccPartition,
    /// Export attribute schemas and per-article attribute vectors.
    Attributes,
    /// Single-label metrics against one gold article per query.
    EvalSingle,
    /// Article-driven multi-label metrics over a partition.
    EvalMultilabel,
    /// Topic-driven multi-label metrics over gold article sets.
    EvalTopic,
    /// Join metric reports into summary tables.
    Report,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Ingest => "ingest",
            Command::Stats => "stats",
            Command::Vocab => "vocab",
            Command::MakeTraining => "make-training",
            Command::MakeQueries => "make-queries",
            Command::TrainBaseline => "train-baseline",
            Command::Predict => "predict",
            Command::LoadPredictions => "load-predictions",
            Command::Cluster => "cluster",
            Command::IccPartition => "icc-partition",
            Command::Attributes => "attributes",
            Command::EvalSingle => "eval-single",
            Command::EvalMultilabel => "eval-multilabel",
            Command::EvalTopic => "eval-topic",
            Command::Report => "report",
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let base = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let config = base.overlaid(cli.flags);
    config.validate()?;
    let mut run = Run::new(config.out_dir());
    let command = cli.command;
    match command {
        Command::Ingest => commands::ingest(&mut run, &config),
        Command::Stats => commands::stats(&mut run, &config),
        Command::Vocab => commands::vocab(&mut run, &config),
        Command::MakeTraining => commands::make_training(&mut run, &config),
        Command::MakeQueries => commands::make_queries(&mut run, &config),
        Command::TrainBaseline => commands::train_baseline_cmd(&mut run, &config),
        Command::Predict => commands::predict(&mut run, &config),
        Command::LoadPredictions => commands::load_predictions(&mut run, &config),
        Command::Cluster => commands::cluster(&mut run, &config),
        Command::IccPartition => commands::icc_partition_cmd(&mut run, &config),
        Command::Attributes => commands::attributes(&mut run, &config),
        Command::EvalSingle => commands::eval_single(&mut run, &config),
        Command::EvalMultilabel => commands::eval_multilabel(&mut run, &config),
        Command::EvalTopic => commands::eval_topic(&mut run, &config),
        Command::Report => commands::report(&mut run, &config),
    }?;
    for name in run.finish(command.name(), &config, config.seed())? {
        println!("{}", config.out_dir().join(name).display());
    }
    Ok(())
}

fn error_json(kind: &str, message: &str) -> String {
    serde_json::json!({ "error": kind, "message": message }).to_string()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e)
            if matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            ) =>
        {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{}", error_json("usage", e.to_string().trim()));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let kind = e.downcast_ref::<statute_core::Error>().map_or("internal", |c| c.kind());
            eprintln!("{}", error_json(kind, &format!("{e:#}")));
            ExitCode::FAILURE
        }
    }
}
