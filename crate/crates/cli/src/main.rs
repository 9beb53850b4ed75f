//! `aag`: subspace discovery, ensemble training, scoring, benchmarking and
//! stability analysis from the command line.

mod commands;

use std::process::ExitCode;

use aag_core::Error;
use clap::builder::TypedValueParser;
use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(
    name = "aag",
    version,
    about = "Correlated subspace search and subspace anomaly detection"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Discover correlated attribute subspaces and write them as JSON.
    Subspaces(SubspacesArgs),
    /// Train an ensemble on normal data and write the model as JSON.
    Train(TrainArgs),
    /// Score rows with a trained model (CSV: row_index, score, label).
    Score(ScoreArgs),
    /// Run repeated benchmark splits and report F1 per repetition.
    Bench(BenchArgs),
    /// Measure how stable the discovered subspaces are under resampling.
    Stability(StabilityArgs),
}

#[derive(Args, Debug, Clone)]
pub struct InputArgs {
    /// Input CSV file with a header row.
    #[arg(long)]
    pub input: std::path::PathBuf,
    /// Field delimiter.
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,
    /// Cell values treated as missing; repeat to give several. Defaults to "" and "?".
    #[arg(long = "missing-marker")]
    pub missing_markers: Vec<String>,
    /// Column excluded from the attributes (for `bench`, the class column).
    #[arg(long)]
    pub class_column: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct SearchArgs {
    /// Equal-frequency bins per numeric attribute.
    #[arg(long, default_value_t = 10)]
    pub bins: usize,
    /// Largest attribute count evaluated exactly (2 or 3).
    #[arg(long, default_value_t = 3)]
    pub cap: usize,
    /// Keep single-attribute subspaces in the output.
    #[arg(long)]
    pub include_singletons: bool,
}

#[derive(Args, Debug, Clone)]
pub struct EnsembleArgs {
    /// Target false-positive rate on validation normals.
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Share of training rows held out for weighting and the threshold.
    #[arg(long, default_value_t = 0.3)]
    pub val_fraction: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct SubspacesArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub search: SearchArgs,
    /// Output JSON file; stdout when omitted.
    #[arg(long)]
    pub output: Option<std::path::PathBuf>,
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub search: SearchArgs,
    #[command(flatten)]
    pub ensemble: EnsembleArgs,
    /// Where to write the model JSON.
    #[arg(long)]
    pub model: std::path::PathBuf,
}

#[derive(Args, Debug)]
pub struct ScoreArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Model JSON written by `train`.
    #[arg(long)]
    pub model: std::path::PathBuf,
    /// Output CSV file; stdout when omitted.
    #[arg(long)]
    pub output: Option<std::path::PathBuf>,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub search: SearchArgs,
    #[command(flatten)]
    pub ensemble: EnsembleArgs,
    /// Benchmark protocol: 1 = Gaussian noise on some attributes, 3 = held-out classes.
    #[arg(long, default_value_t = 1, value_parser = clap::builder::PossibleValuesParser::new(["1", "3"]).map(|s: String| s.parse::<u8>().unwrap_or(1)))]
    pub setting: u8,
    /// Share of attributes perturbed in setting 1.
    #[arg(long, default_value_t = 0.1)]
    pub fraction: f64,
    /// Share of non-majority rows used as novelties in setting 3.
    #[arg(long, default_value_t = 0.1)]
    pub minority_fraction: f64,
    #[arg(long, default_value_t = 20)]
    pub repeats: usize,
    /// Output directory for bench.csv and bench.json.
    #[arg(long)]
    pub output: std::path::PathBuf,
}

#[derive(Args, Debug)]
pub struct StabilityArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub search: SearchArgs,
    /// Number of resampled runs.
    #[arg(long, default_value_t = 20)]
    pub repeats: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output JSON file; stdout when omitted.
    #[arg(long)]
    pub output: Option<std::path::PathBuf>,
}

pub enum Failure {
    Usage(String),
    Data(String),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) => Failure::Usage(e.to_string()),
            Error::UnsupportedArity(_) => Failure::Internal(e.to_string()),
            _ => Failure::Data(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Subspaces(args) => commands::subspaces(&args),
        Command::Train(args) => commands::train(&args),
        Command::Score(args) => commands::score(&args),
        Command::Bench(args) => commands::bench(&args),
        Command::Stability(args) => commands::stability(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Data(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(m)) => {
            eprintln!("internal error: {m}");
            ExitCode::from(3)
        }
    }
}
