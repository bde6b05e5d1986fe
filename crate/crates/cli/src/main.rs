//! `taxovec`: build centroids, train embeddings, compose category vectors,
//! classify documents and evaluate rankings.

mod artifacts;
mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use taxovec::{Measure, Result};

use commands::{AblationInputs, EvalInputs, TrainMode};
use config::{CatvecSource, PipelineConfig};

#[derive(Parser)]
#[command(name = "taxovec", version, about = "Taxonomy classification with centroids and embeddings")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand; they override values from `--config`.
#[derive(Args, Default)]
struct Common {
    /// JSON pipeline config; flags given on the command line win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    taxonomy: Option<PathBuf>,
    /// Documents as JSON lines: {"id", "text", "label"?}.
    #[arg(long, global = true)]
    docs: Option<PathBuf>,
    /// Word vectors in word2vec text format.
    #[arg(long, global = true)]
    embeddings: Option<PathBuf>,
    /// Directory written by `build`.
    #[arg(long, global = true)]
    models: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    measure: Option<Measure>,
    #[arg(long, global = true)]
    theta: Option<f64>,
    #[arg(long, global = true)]
    alpha: Option<f64>,
    #[arg(long, global = true)]
    k: Option<usize>,
    #[arg(long, global = true)]
    merge_lambda: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Fit tf-idf and category centroids from labeled documents.
    Build,
    /// Train word vectors, optionally with category vectors.
    Train(TrainArgs),
    /// Compose category vectors from centroids and word vectors.
    GenCatvecs(GenArgs),
    /// Rank categories for each document.
    Classify(ClassifyArgs),
    /// Score predictions against gold labels or relevance judgments.
    Evaluate(EvaluateArgs),
    /// Compare similarity measures on labeled documents.
    Ablate(AblateArgs),
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long, value_enum, default_value_t = TrainMode::Plain)]
    mode: TrainMode,
    /// Plain-text corpus, one sentence per line; defaults to the texts of --docs.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Candidate categories per word in category mode; 0 disables them.
    #[arg(long)]
    candidates: Option<usize>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    negatives: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    min_count: Option<usize>,
    #[arg(long)]
    subsample: Option<f64>,
}

#[derive(Args)]
struct GenArgs {
    /// Store to receive the category vectors instead of a copy of --embeddings.
    #[arg(long)]
    append_to: Option<PathBuf>,
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(long, value_enum)]
    catvecs: Option<CatvecSource>,
    /// Precompute word neighbors above theta.
    #[arg(long)]
    neighbor_index: bool,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Rankings from `classify`, or {"id", "label"} lines.
    #[arg(long)]
    predictions: PathBuf,
    /// Gold labels as {"id", "label"} lines.
    #[arg(long)]
    gold: Option<PathBuf>,
    /// Graded judgments as {"doc_id", "path", "grade"} lines.
    #[arg(long)]
    judgments: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    ks: Vec<usize>,
    /// Count only fully relevant categories.
    #[arg(long)]
    binary: bool,
}

#[derive(Args)]
struct AblateArgs {
    #[arg(long, value_delimiter = ',')]
    measures: Vec<Measure>,
    #[arg(long, value_delimiter = ',')]
    thetas: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    alphas: Vec<f64>,
    #[arg(long, value_enum)]
    catvecs: Option<CatvecSource>,
    #[arg(long)]
    judgments: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    ks: Vec<usize>,
    #[arg(long)]
    binary: bool,
}

fn resolve(common: &Common, command: &Command) -> Result<PipelineConfig> {
    let mut cfg = match &common.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    let paths = &mut cfg.paths;
    let set = |slot: &mut Option<PathBuf>, flag: &Option<PathBuf>| {
        if flag.is_some() {
            slot.clone_from(flag);
        }
    };
    set(&mut paths.taxonomy, &common.taxonomy);
    set(&mut paths.documents, &common.docs);
    set(&mut paths.embeddings, &common.embeddings);
    set(&mut paths.models, &common.models);
    set(&mut paths.output, &common.out);
    if let Some(m) = common.measure {
        cfg.similarity.measure = m;
    }
    if let Some(x) = common.theta {
        cfg.similarity.theta = x;
    }
    if let Some(x) = common.alpha {
        cfg.similarity.alpha = x;
    }
    if let Some(x) = common.k {
        cfg.k = x;
    }
    if common.merge_lambda.is_some() {
        cfg.merge_lambda = common.merge_lambda;
    }
    if let Some(x) = common.seed {
        cfg.seed = x;
    }
    if let Some(x) = common.workers {
        cfg.train.workers = x;
    }
    cfg.train.seed = cfg.seed;

    match command {
        Command::Train(a) => {
            let t = &mut cfg.train;
            for (slot, v) in [
                (&mut t.dim, a.dim),
                (&mut t.epochs, a.epochs),
                (&mut t.window, a.window),
                (&mut t.negatives, a.negatives),
                (&mut t.min_count, a.min_count),
                (&mut cfg.candidates, a.candidates),
            ] {
                if let Some(v) = v {
                    *slot = v;
                }
            }
            if let Some(v) = a.learning_rate {
                t.learning_rate = v;
            }
            if let Some(v) = a.subsample {
                t.subsample = v;
            }
        }
        Command::Classify(ClassifyArgs { catvecs: Some(s), .. }) | Command::Ablate(AblateArgs { catvecs: Some(s), .. }) => {
            cfg.catvecs = *s;
        }
        _ => {}
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    let cfg = resolve(&cli.common, &cli.command)?;
    let mut out = commands::stdout();
    match &cli.command {
        Command::Build => commands::build(&cfg, &mut out),
        Command::Train(a) => commands::train(&cfg, a.mode, a.corpus.as_deref(), &mut out),
        Command::GenCatvecs(a) => commands::gen_catvecs(&cfg, a.append_to.as_deref(), &mut out),
        Command::Classify(a) => commands::classify(&cfg, a.neighbor_index, &mut out),
        Command::Evaluate(a) => commands::evaluate(
            &cfg,
            &EvalInputs {
                predictions: &a.predictions,
                gold: a.gold.as_deref(),
                judgments: a.judgments.as_deref(),
                ks: &a.ks,
                binary: a.binary,
            },
            &mut out,
        ),
        Command::Ablate(a) => commands::ablate(
            &cfg,
            &AblationInputs {
                measures: &a.measures,
                alphas: &a.alphas,
                thetas: &a.thetas,
                judgments: a.judgments.as_deref(),
                ks: &a.ks,
                binary: a.binary,
            },
            &mut out,
        ),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 4 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
