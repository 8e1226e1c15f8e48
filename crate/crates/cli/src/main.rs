use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod saved;

use saved::ModelKind;

/// Early software effort estimation from use case points.
#[derive(Debug, Parser)]
#[command(name = "fmt-effort", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample a synthetic dataset matching a source profile (ind1, ind2, edu).
    Synth {
        profile: String,
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output CSV; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate the piecewise-linear benchmark dataset.
    Bench {
        #[arg(default_value_t = 84)]
        n: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Size a use-case model and print its classical effort estimate.
    Ucp {
        model: PathBuf,
        #[arg(long, default_value_t = fmt_effort::ucp::DEFAULT_RATIO)]
        ratio: f64,
    },
    /// Train a model on a dataset and write it as JSON.
    Train {
        data: PathBuf,
        #[arg(long, value_enum, default_value = "fmt")]
        model: ModelKind,
        #[command(flatten)]
        tuning: Tuning,
        #[arg(long)]
        out: PathBuf,
    },
    /// Predict effort for every project of a dataset.
    Predict {
        model: PathBuf,
        data: PathBuf,
        /// Output CSV (`id,predicted`); stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score a predictions file against the actual efforts of a dataset.
    Evaluate {
        predictions: PathBuf,
        data: PathBuf,
        /// Output JSON report; the text summary always goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Holdout comparison of FMT, Treeboost, MLR and the UCP ratio rule.
    Compare {
        data: PathBuf,
        #[arg(long, default_value_t = 59)]
        train_count: usize,
        #[command(flatten)]
        tuning: Tuning,
        /// Output directory for metrics, win-tie-loss and boxplot files.
        #[arg(long)]
        out: PathBuf,
    },
}

/// Optional overrides of the model defaults.
#[derive(Debug, Clone, Args)]
struct Tuning {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    clusters: Option<usize>,
    #[arg(long)]
    fuzzifier: Option<f64>,
    #[arg(long)]
    trees: Option<usize>,
    #[arg(long)]
    shrinkage: Option<f64>,
    #[arg(long)]
    ratio: Option<f64>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("FMT_LOG", "warn")).init();
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
