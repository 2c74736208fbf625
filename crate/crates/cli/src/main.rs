use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hdloc::testing::CriticalMode;
use hdloc::Error;

mod commands;

/// Exit status for usage and validation errors.
const EXIT_USAGE: u8 = 2;
/// Exit status for numeric failures (singular or degenerate estimates).
const EXIT_NUMERIC: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "hdloc",
    version,
    about = "One-sample location tests for high-dimensional Gaussian data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run Hotelling's, Dempster's and the weighted test on a dataset.
    Test(TestArgs),
    /// Print the power-optimal weight for given parameters or a dataset.
    Weight(WeightArgs),
    /// Local asymptotic powers, the dominance interval and the regime.
    Power(PowerArgs),
    /// Run a simulation study described by a JSON spec.
    Simulate(SimulateArgs),
    /// Check a JSON spec without running it.
    Validate(ValidateArgs),
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum Critical {
    Normal,
    Cf,
}

impl From<Critical> for CriticalMode {
    fn from(c: Critical) -> Self {
        match c {
            Critical::Normal => CriticalMode::Normal,
            Critical::Cf => CriticalMode::CornishFisher,
        }
    }
}

fn existing_file(s: &str) -> Result<PathBuf, String> {
    let path = PathBuf::from(s);
    if path.is_file() {
        Ok(path)
    } else {
        Err(format!("no such file: {s}"))
    }
}

#[derive(Args, Debug)]
struct TestArgs {
    /// CSV file with one observation per row.
    #[arg(value_parser = existing_file)]
    data: PathBuf,
    /// Hypothesised mean: a comma-separated list or a file; defaults to zero.
    #[arg(long)]
    mu0: Option<String>,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Critical point of the weighted test.
    #[arg(long, value_enum, default_value_t = Critical::Cf)]
    critical: Critical,
    /// The first CSV row is a header.
    #[arg(long)]
    header: bool,
}

#[derive(Args, Debug)]
struct WeightArgs {
    /// Estimate the parameters from this CSV file instead.
    #[arg(long, value_parser = existing_file, conflicts_with_all = ["c", "a1", "a2"])]
    data: Option<PathBuf>,
    #[arg(long, requires_all = ["a1", "a2"])]
    c: Option<f64>,
    #[arg(long)]
    a1: Option<f64>,
    #[arg(long)]
    a2: Option<f64>,
    #[arg(long)]
    header: bool,
}

#[derive(Args, Debug)]
struct PowerArgs {
    /// Aspect ratio p/n.
    #[arg(long)]
    c: f64,
    #[arg(long, default_value_t = 1.0)]
    a1: f64,
    #[arg(long, default_value_t = 1.0)]
    a2: f64,
    /// Degrees of freedom n.
    #[arg(long, default_value_t = 100.0)]
    n: f64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Euclidean squared shift Δ_I²; zero gives the null.
    #[arg(long = "delta2-identity", default_value_t = 0.0)]
    delta2_identity: f64,
    /// Mahalanobis squared shift Δ²; defaults to ratio · Δ_I².
    #[arg(long, conflicts_with = "ratio")]
    delta2: Option<f64>,
    /// Δ²/Δ_I²; 1 corresponds to Σ = I.
    #[arg(long, default_value_t = 1.0)]
    ratio: f64,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// JSON experiment spec.
    #[arg(value_parser = existing_file)]
    spec: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Master seed; overrides the spec and HDLOC_SEED.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores); never changes results.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Overrides the spec's critical mode for the weighted test.
    #[arg(long, value_enum)]
    critical: Option<Critical>,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    #[arg(value_parser = existing_file)]
    spec: PathBuf,
}

fn exit_code(err: &Error) -> u8 {
    if err.is_numeric() {
        EXIT_NUMERIC
    } else {
        EXIT_USAGE
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Test(a) => commands::test(&a),
        Command::Weight(a) => commands::weight(&a),
        Command::Power(a) => commands::power(&a),
        Command::Simulate(a) => commands::simulate(&a),
        Command::Validate(a) => commands::validate(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
