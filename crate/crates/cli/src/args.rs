use std::f64::consts::FRAC_PI_4;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "ctherm",
    version,
    about = "Thermometry with conditional thermal states: Fisher information, skew bounds, work analysis"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// ΔI_β for H = ω σ_z measured in a pointer basis rotated by θ.
    QubitSweep(QubitSweepArgs),
    /// Fisher information of a model's CTS and Gibbs state over a β grid.
    Qfi(QfiArgs),
    /// Work, dissipation and quantum heat of a unitary protocol.
    Process(ProcessArgs),
    /// Run the randomized property suite.
    Verify(VerifyArgs),
    /// Monte Carlo comparison of estimator error with the Cramér-Rao bound.
    Estimate(EstimateArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub beta_start: f64,
    #[arg(long, default_value_t = 5.0, allow_negative_numbers = true)]
    pub beta_stop: f64,
    #[arg(long, default_value_t = 0.05)]
    pub beta_step: f64,
    /// Largest |β| accepted, in units of 1/‖H‖ (spectral radius).
    #[arg(long, default_value_t = 50.0)]
    pub beta_max: f64,
}

#[derive(Debug, Args)]
pub struct QubitSweepArgs {
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub omega: f64,
    /// Pointer-basis rotation angle in radians.
    #[arg(long, default_value_t = FRAC_PI_4, allow_negative_numbers = true)]
    pub theta: f64,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct QfiArgs {
    /// Model JSON file.
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ProcessArgs {
    /// Process JSON file.
    #[arg(long)]
    pub spec: PathBuf,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = ctherm::verify::DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = ctherm::verify::DEFAULT_TRIALS)]
    pub trials: usize,
    /// Comma-separated dimensions; trial t uses dims[t mod len].
    #[arg(long, value_delimiter = ',', default_values_t = ctherm::verify::DEFAULT_DIMS)]
    pub dims: Vec<usize>,
    /// Check a single model instead of random instances.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Cap on d for the explicit d²-dimensional skew-information route.
    #[arg(long, env = "CTS_MAX_DIM", default_value_t = ctherm::asymmetry::DEFAULT_MAX_EXPLICIT_DIM)]
    pub max_dim: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Model JSON file.
    #[arg(long)]
    pub model: PathBuf,
    /// True inverse temperature; defaults to the model's `beta`.
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 200)]
    pub repeats: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}
