//! `ssa-lab`: batch front end for decomposition, reconstruction, forecasting,
//! parameter estimation and simulation studies.
//!
//! Exit codes: 0 success, 2 bad arguments or unparseable input, 3 the
//! analysis itself failed, 4 files could not be read or written.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ssa_lab::SsaError;

#[derive(Parser, Debug)]
#[command(name = "ssa-lab", version, about = "Singular spectrum analysis and subspace-based estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decompose a series into eigentriples (JSON by default).
    Decompose(DecomposeArgs),
    /// Reconstruct a series from a group of eigentriples.
    Reconstruct(ReconstructArgs),
    /// Recurrent SSA forecast.
    Forecast(ForecastArgs),
    /// Estimate frequencies and damping factors.
    Estimate(EstimateArgs),
    /// Evaluate a Min-Norm, MUSIC or EV pseudospectrum.
    Pseudospectrum(PseudospectrumArgs),
    /// Run a simulation experiment described by a JSON config.
    Simulate(SimulateArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
pub struct Common {
    /// Output file (default: stdout).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Print diagnostics to stderr.
    #[arg(long, short)]
    pub verbose: bool,
}

#[derive(Args, Debug)]
pub struct SeriesArgs {
    /// Input CSV, one value per line (first column), optional header; `-` reads stdin.
    #[arg(long, short)]
    pub input: PathBuf,
    /// Window length L (default: floor((N+1)/2)).
    #[arg(long, short = 'L')]
    pub window: Option<usize>,
    /// Toeplitz (lag-covariance) decomposition instead of the basic SVD.
    #[arg(long)]
    pub toeplitz: bool,
    /// Subtract the mean first and add it back to the results.
    #[arg(long)]
    pub center: bool,
}

#[derive(Args, Debug)]
pub struct DecomposeArgs {
    #[command(flatten)]
    pub series: SeriesArgs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct ReconstructArgs {
    /// Input series; not needed with --from-decomposition.
    #[arg(long, short, required_unless_present = "from_decomposition")]
    pub input: Option<PathBuf>,
    #[arg(long, short = 'L')]
    pub window: Option<usize>,
    #[arg(long)]
    pub toeplitz: bool,
    #[arg(long)]
    pub center: bool,
    /// Eigentriples to sum, 1-based, e.g. `1,2,5-8`.
    #[arg(long, short, conflicts_with = "rank")]
    pub group: Option<String>,
    /// Shorthand for `--group 1-r`.
    #[arg(long, short)]
    pub rank: Option<usize>,
    /// Decomposition JSON written by `decompose`.
    #[arg(long, conflicts_with_all = ["input", "window", "toeplitz", "center"])]
    pub from_decomposition: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct ForecastArgs {
    #[command(flatten)]
    pub series: SeriesArgs,
    #[arg(long, short)]
    pub rank: usize,
    #[arg(long, short = 'M')]
    pub steps: usize,
    /// Window of the decomposition that supplies the recurrence (default: --window).
    #[arg(long)]
    pub lrf_window: Option<usize>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub series: SeriesArgs,
    #[arg(long, short)]
    pub rank: usize,
    /// esprit-ls, esprit-tls, root-music, root-minnorm, minnorm, music or ev.
    #[arg(long, short, default_value = "esprit-ls")]
    pub method: String,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct PseudospectrumArgs {
    #[command(flatten)]
    pub series: SeriesArgs,
    #[arg(long, short)]
    pub rank: usize,
    /// minnorm, music or ev.
    #[arg(long, short, default_value = "music")]
    pub method: String,
    /// Number of grid points on [0, 0.5].
    #[arg(long, default_value_t = ssa_lab::estimate::DEFAULT_GRID)]
    pub grid: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Experiment config (JSON).
    #[arg(long, short)]
    pub config: PathBuf,
    /// Override the replication count of the config.
    #[arg(long)]
    pub reps: Option<usize>,
    /// Override the master seed of the config.
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Domain(SsaError),
    Io(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            Self::Usage(_) => 2,
            Self::Domain(_) => 3,
            Self::Io(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Usage(m) | Self::Io(m) => f.write_str(m),
            Self::Domain(e) => write!(f, "{e}"),
        }
    }
}

impl From<SsaError> for CliError {
    fn from(e: SsaError) -> Self {
        match e {
            SsaError::Parse(_) | SsaError::GroupSyntax(_) => Self::Usage(e.to_string()),
            e => Self::Domain(e),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Decompose(a) => commands::decompose(a),
        Command::Reconstruct(a) => commands::reconstruct(a),
        Command::Forecast(a) => commands::forecast(a),
        Command::Estimate(a) => commands::estimate(a),
        Command::Pseudospectrum(a) => commands::pseudospectrum(a),
        Command::Simulate(a) => commands::simulate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ssa-lab: error: {e}");
            ExitCode::from(e.code())
        }
    }
}
