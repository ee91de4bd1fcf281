//! `otc`: batch driver for the timelike-curve protocols.
//!
//! Exit status: 0 on success, 1 for bad arguments, 2 when an input file
//! cannot be read or parsed, 3 when the protocol itself fails.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "otc", version, about = "Seeded experiments with open and closed timelike curves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "subcommand", rename_all = "snake_case")]
enum Command {
    /// Estimate an expectation value from one copy via OTC-decorrelated ancillas.
    Measure(MeasureArgs),
    /// Apply the S-gate `n_z -> n_z^2` one or more times.
    Sgate(SgateArgs),
    /// Decide satisfiability of a DIMACS CNF formula.
    Sat(SatArgs),
    /// Reconstruct a single qudit from decorrelated imperfect clones.
    Clone(CloneArgs),
    /// Solve a Deutsch self-consistency condition.
    Fixpoint(FixpointArgs),
}

#[derive(Debug, Args, Serialize, Clone)]
struct Common {
    /// Independent trials; trial `i` uses seed `seed + i`.
    #[arg(long, default_value_t = 1)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize, Clone)]
struct StateInput {
    /// State fixture: JSON with `dims`, `re`, `im` (row-major density matrix).
    #[arg(long, conflicts_with = "bloch")]
    state: Option<PathBuf>,
    /// Qubit Bloch vector `x,y,z` instead of a fixture.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    bloch: Option<Vec<f64>>,
}

#[derive(Debug, Args, Serialize)]
struct MeasureArgs {
    #[command(flatten)]
    input: StateInput,
    /// sigmax, sigmay, sigmaz, or gm<k> for the k-th Gell-Mann matrix (1-based).
    #[arg(long, default_value = "sigmaz")]
    obs: String,
    #[arg(long, default_value_t = 0.1, allow_hyphen_values = true)]
    delta: f64,
    #[arg(long, default_value_t = 0.05, allow_hyphen_values = true)]
    eps: f64,
    /// Ancilla count; defaults to the Hoeffding budget.
    #[arg(long)]
    n: Option<usize>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args, Serialize)]
struct SgateArgs {
    #[command(flatten)]
    input: StateInput,
    /// Number of applications.
    #[arg(long, default_value_t = 1)]
    p: usize,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum ModeArg {
    Circuit,
    Analytic,
}

#[derive(Debug, Args, Serialize)]
struct SatArgs {
    #[arg(long)]
    cnf: PathBuf,
    /// Squaring rounds; default ceil(log2(n+1)) + 2.
    #[arg(long)]
    p: Option<usize>,
    #[arg(long, default_value_t = 20)]
    q: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Analytic)]
    mode: ModeArg,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum BackendArg {
    Marginal,
    Exact,
}

#[derive(Debug, Args, Serialize)]
struct CloneArgs {
    #[command(flatten)]
    input: StateInput,
    #[arg(long, default_value_t = 0.1, allow_hyphen_values = true)]
    delta: f64,
    #[arg(long, default_value_t = 0.05, allow_hyphen_values = true)]
    eps: f64,
    #[arg(long, value_enum, default_value_t = BackendArg::Marginal)]
    backend: BackendArg,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum InteractionArg {
    /// Input and CTC qubit swap.
    Swap,
    /// Input controls a NOT on the CTC qubit.
    Cnot,
    /// CTC qubit flips the input, then is negated itself.
    Grandfather,
    /// No interaction: the input qubit itself travels (an OTC).
    Otc,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum StrategyArg {
    Auto,
    Iterative,
    Spectral,
}

#[derive(Debug, Args, Serialize)]
struct FixpointArgs {
    #[command(flatten)]
    input: StateInput,
    #[arg(long, value_enum, default_value_t = InteractionArg::Swap)]
    interaction: InteractionArg,
    #[arg(long, default_value_t = 1e-10, allow_hyphen_values = true)]
    tol: f64,
    #[arg(long, default_value_t = 100_000)]
    max_iter: usize,
    #[arg(long, value_enum, default_value_t = StrategyArg::Auto)]
    strategy: StrategyArg,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Serialize, Clone, Copy, ValueEnum, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
enum Format {
    Json,
    Csv,
}

/// Failure classes, one per exit status.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Input(String),
    Protocol(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Input(_) => 2,
            Failure::Protocol(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Input(m) | Failure::Protocol(m) => m,
        }
    }
}

impl From<otc_core::Error> for Failure {
    fn from(e: otc_core::Error) -> Self {
        use otc_core::Error as E;
        match e {
            E::InvalidParameter { .. } | E::ShapeMismatch { .. } | E::LayoutMismatch(_) => {
                Failure::Usage(e.to_string())
            }
            E::Parse(_) => Failure::Input(e.to_string()),
            _ => Failure::Protocol(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
