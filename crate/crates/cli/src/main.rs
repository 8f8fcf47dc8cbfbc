//! `arbpulse` — solve, continue, search, verify and benchmark composite
//! pulse sequences from the command line.
//!
//! Exit codes: 0 success, 1 runtime failure (I/O, resource limits),
//! 2 no solution / verification failed, 3 invalid input, 64 usage error.

mod angle;
mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::angle::{parse_angle, parse_angle_list, parse_number, parse_number_list, List};

#[derive(Debug, Parser)]
#[command(name = "arbpulse", version, about = "Composite pulse sequences robust to amplitude errors")]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,

    /// Write the result here instead of stdout. Relative paths are placed
    /// under $ARBPULSE_OUTPUT_DIR when it is set.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form solutions of a short family (AP1, AP2, PD2, NS2, AP3, PD4).
    Solve(SolveArgs),
    /// Follow a seeded solution in γ.
    Continue(ContinueArgs),
    /// Multi-start Newton search for all solution classes at one γ.
    Search(SearchArgs),
    /// Check constraint residuals and error scaling of a phase list.
    Verify(VerifyArgs),
    /// Exact Gröbner basis pipeline for a small symmetric system.
    Groebner(GroebnerArgs),
    /// Error-versus-ε curves exported as CSV.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub family: String,
    #[arg(long, value_parser = parse_number, allow_hyphen_values = true)]
    pub gamma: f64,
    /// Free parameter `t₄ = tan(φ₄/2)` of the NS2 family.
    #[arg(long, value_parser = parse_number, allow_hyphen_values = true)]
    pub t4: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SeedKind {
    /// `(π ×b, π/2 ×(n−b))` at γ = 2b.
    Top,
    /// Palindromic `(2mπ/(n+1))(1, −1, 2, −2, …)` at γ = 2.
    Pd,
    /// ToP solution at γ = 1 built order by order.
    Bootstrap,
}

#[derive(Debug, Args)]
pub struct ContinueArgs {
    #[arg(long, value_enum)]
    pub seed: SeedKind,
    #[arg(long)]
    pub n: usize,
    /// ToP seed index (0 ≤ b ≤ ⌊n/2⌋).
    #[arg(long, default_value_t = 0)]
    pub b: usize,
    /// Palindromic seed multiplier, coprime to n + 1 (default n/2).
    #[arg(long)]
    pub m: Option<usize>,
    /// Target γ.
    #[arg(long, value_parser = parse_number, allow_hyphen_values = true)]
    pub to: f64,
    /// Also write every path record as JSON lines to this file.
    #[arg(long)]
    pub path_jsonl: Option<PathBuf>,
    #[arg(long, value_parser = parse_number)]
    pub min_step: Option<f64>,
    #[arg(long, value_parser = parse_number)]
    pub max_step: Option<f64>,
    #[arg(long, value_parser = parse_number)]
    pub singular_tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_parser = parse_number, allow_hyphen_values = true)]
    pub gamma: f64,
    #[arg(long, default_value = "AP")]
    pub symmetry: String,
    /// Number of random starts (default 10³·2ⁿ).
    #[arg(long)]
    pub starts: Option<usize>,
    /// RNG seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Extra γ values to search and continue from (comma-separated).
    #[arg(long, value_parser = parse_number_list)]
    pub also_gamma: Option<List>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Comma-separated phases (radians, or multiples of pi).
    #[arg(long, value_parser = parse_angle_list, allow_hyphen_values = true, conflicts_with = "input")]
    pub phases: Option<List>,
    /// JSON produced by `solve`, `search` or `continue` (`-` for stdin).
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_parser = parse_angle, default_value = "2pi", allow_hyphen_values = true)]
    pub theta0: f64,
    #[arg(long, value_parser = parse_number, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    /// Correction order to check.
    #[arg(long)]
    pub n: Option<usize>,
    /// Largest accepted residual norm.
    #[arg(long, value_parser = parse_number, default_value = "1e-4")]
    pub tol: f64,
    /// Also require the log-log slope over ε ∈ [10⁻³, 10⁻²] to be n+1 ± 0.1.
    #[arg(long)]
    pub check_slope: bool,
}

#[derive(Debug, Args)]
pub struct GroebnerArgs {
    /// Shorthand for a family such as PD2 or AP1.
    #[arg(long, conflicts_with_all = ["n", "symmetry"])]
    pub system: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub symmetry: Option<String>,
    /// Also list the real zeros (as phases) at this γ.
    #[arg(long, value_parser = parse_number, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_parser = parse_number, default_value = "0.5")]
    pub gamma: f64,
    /// Orders 1..=n_max, each from the ToP continuation branch.
    #[arg(long, default_value_t = 4)]
    pub n_max: usize,
    #[arg(long, default_value = "trace-distance")]
    pub metric: arbpulse::Metric,
    #[arg(long, value_parser = parse_number, default_value = "1e-4")]
    pub eps_min: f64,
    #[arg(long, value_parser = parse_number, default_value = "0.1")]
    pub eps_max: f64,
    #[arg(long, default_value_t = 31)]
    pub points: usize,
    /// Also export curves for the built-in π-pulse sequences.
    #[arg(long)]
    pub library: bool,
    /// Add Monte Carlo curves with this amplitude/phase noise level.
    #[arg(long, value_parser = parse_number)]
    pub noise_sigma: Option<f64>,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Directory for the CSV files (default $ARBPULSE_OUTPUT_DIR, else `.`).
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    NoSolution(String),
    #[error(transparent)]
    Core(#[from] arbpulse::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use arbpulse::Error as E;
        match self {
            CliError::NoSolution(_) => 2,
            CliError::Invalid(_) | CliError::Json(_) => 3,
            CliError::Core(
                E::InvalidArgument(_)
                | E::LengthMismatch { .. }
                | E::Infeasible { .. }
                | E::GammaMismatch { .. }
                | E::Unsupported(_)
                | E::ResidualTooLarge { .. }
                | E::SingularJacobian { .. },
            ) => 3,
            CliError::Core(_) | CliError::Io(_) => 1,
        }
    }
}

pub fn run<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 64 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match commands::dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("arbpulse: {e}");
            e.exit_code()
        }
    }
}

fn main() -> ExitCode {
    ExitCode::from(run(std::env::args_os()))
}
