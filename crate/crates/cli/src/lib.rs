//! The `saferoute` command line: learn a network from a CSV, query it, and
//! pick the safest route through a road graph for one snapshot or a series.
//!
//! Primary outputs are pretty-printed JSON with a trailing newline, written
//! to `--out` or standard output. They depend only on inputs and flags, so
//! reruns are byte-identical. Each run also writes a [`RunManifest`].

pub mod commands;
pub mod error;
pub mod manifest;
pub mod replay;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use saferoute_core::ingest::ImputationMode;

pub use error::{CliError, ExitKind};
pub use manifest::RunManifest;
pub use replay::{ReplayEntry, ReplayReport};

#[derive(Debug, Parser)]
#[command(
    name = "saferoute",
    version,
    about = "Bayesian-network road safety and safest-route planning"
)]
pub struct Cli {
    /// Where to write the run manifest. Defaults to `<out-stem>.manifest.json`
    /// beside `--out`, or standard error without `--out`.
    #[arg(long, global = true, value_name = "FILE")]
    pub manifest: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Learn structure and parameters from a categorical CSV.
    Learn(LearnArgs),
    /// Collision and safety probabilities under an evidence file.
    Infer(InferArgs),
    /// Safest route for one snapshot.
    Route(RouteArgs),
    /// Safest route for every snapshot in a series.
    Replay(ReplayArgs),
    /// Check input files without computing anything.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ImputeArg {
    Reject,
    ColumnMode,
    MarginalSample,
}

impl From<ImputeArg> for ImputationMode {
    fn from(value: ImputeArg) -> Self {
        match value {
            ImputeArg::Reject => ImputationMode::Reject,
            ImputeArg::ColumnMode => ImputationMode::ColumnMode,
            ImputeArg::MarginalSample => ImputationMode::MarginalSample,
        }
    }
}

#[derive(Debug, Args)]
pub struct LearnArgs {
    /// CSV with a header row of variable names.
    pub dataset: PathBuf,
    /// Schema JSON (array of {name, states}); the road-safety schema if omitted.
    #[arg(long)]
    pub schema: Option<PathBuf>,
    /// Comma-separated variable names; schema order if omitted.
    #[arg(long, value_delimiter = ',')]
    pub ordering: Option<Vec<String>>,
    /// Parent cap per node [default: min(3, variables - 1)].
    #[arg(long)]
    pub max_parents: Option<usize>,
    /// Dirichlet prior count per cell, for both scoring and parameters.
    #[arg(long, default_value_t = 1)]
    pub prior_counts: u32,
    #[arg(long, value_enum, default_value_t = ImputeArg::ColumnMode)]
    pub impute: ImputeArg,
    /// Seed for imputation and the train/test shuffle.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Training fraction; 1 trains on every record.
    #[arg(long, default_value_t = 0.8)]
    pub split: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Where to write the parse report; standard error if omitted.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InferArgs {
    #[arg(long)]
    pub network: PathBuf,
    /// JSON object mapping variable names to state labels; no evidence if omitted.
    #[arg(long)]
    pub evidence: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RouteArgs {
    #[arg(long)]
    pub network: PathBuf,
    #[arg(long)]
    pub graph: PathBuf,
    /// A single snapshot; static attributes only if omitted.
    #[arg(long)]
    pub snapshot: Option<PathBuf>,
    #[arg(long)]
    pub from: String,
    #[arg(long)]
    pub to: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    #[arg(long)]
    pub network: PathBuf,
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub snapshots: PathBuf,
    #[arg(long)]
    pub from: String,
    #[arg(long)]
    pub to: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// CSV of `time,score`, one row per snapshot.
    #[arg(long)]
    pub plot_data: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub dataset: Option<PathBuf>,
    /// Schema for --dataset, --evidence and --snapshots when no --network is given.
    #[arg(long)]
    pub schema: Option<PathBuf>,
    #[arg(long)]
    pub network: Option<PathBuf>,
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Requires --graph.
    #[arg(long)]
    pub snapshots: Option<PathBuf>,
    #[arg(long)]
    pub evidence: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` and runs the command, returning the process exit code.
/// Diagnostics go to standard error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitKind::Usage as i32
            } else {
                0
            };
        }
    };
    match commands::execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(std::io::stderr(), "error: {e}");
            e.code()
        }
    }
}
