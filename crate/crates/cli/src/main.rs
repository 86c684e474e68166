//! `displace`: solve, factor and analyze structured linear systems from text files.
//!
//! Exit status: 0 on success, 1 when a solver fails or a check does not pass,
//! 2 on unreadable input or invalid usage. Failures print `error = <Name>` and
//! a one-line message to standard error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use displace_core::{DisplaceError, GeneratorConditioning};

#[derive(Debug, Parser)]
#[command(
    name = "displace",
    version,
    about = "Fast structured solvers with a stability laboratory"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve A x = b and print the solve report.
    Solve(SolveArgs),
    /// Factor A and print growth, residuals and the pivot sequence.
    Factor(FactorArgs),
    /// Check the displacement equation for the generators of a structured matrix.
    VerifyDisplacement(VerifyArgs),
    /// Accuracy of every applicable method over random Toeplitz ensembles.
    Bench(BenchArgs),
    /// Condition-number sweep and generator-growth probes.
    StabilityReport(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    /// Fast method, residual check, refinement, dense fallback.
    Auto,
    Gko,
    Bareiss,
    Levinson,
    Seminormal,
    Dense,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PivotArg {
    Plain,
    Gu,
    Stewart,
}

impl From<PivotArg> for GeneratorConditioning {
    fn from(p: PivotArg) -> Self {
        match p {
            PivotArg::Plain => GeneratorConditioning::Plain,
            PivotArg::Gu => GeneratorConditioning::GuOrthogonal,
            PivotArg::Stewart => GeneratorConditioning::StewartLU,
        }
    }
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("expected a positive number, got {s:?}")),
    }
}

#[derive(Debug, Args)]
pub struct Output {
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Matrix file (dense, toeplitz, hankel or cauchy).
    #[arg(long)]
    matrix: PathBuf,
    /// Right-hand side (vector file).
    #[arg(long)]
    rhs: PathBuf,
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    method: MethodArg,
    /// Generator conditioning for the GKO method.
    #[arg(long, value_enum, default_value_t = PivotArg::Gu)]
    pivot: PivotArg,
    /// Refinement steps for the semi-normal equations.
    #[arg(long, default_value_t = 3)]
    refine: usize,
    /// Largest acceptable normalized residual [default: 100 n eps].
    #[arg(long, value_parser = positive)]
    tol: Option<f64>,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
pub struct FactorArgs {
    #[arg(long)]
    matrix: PathBuf,
    /// gko, bareiss, dense, or auto (bareiss when it applies, else gko for
    /// structured input and dense otherwise).
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    method: MethodArg,
    #[arg(long, value_enum, default_value_t = PivotArg::Gu)]
    pivot: PivotArg,
    /// Write the unit lower triangular factor as a dense matrix file.
    #[arg(long)]
    l_out: Option<PathBuf>,
    /// Write the upper triangular factor as a dense matrix file.
    #[arg(long)]
    u_out: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Toeplitz, Hankel or Cauchy-type matrix file.
    #[arg(long)]
    matrix: PathBuf,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 64)]
    n: usize,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    /// Refinement steps for the semi-normal equations.
    #[arg(long, default_value_t = 3)]
    refine: usize,
    /// Condition bound for the nonsymmetric ensemble.
    #[arg(long, default_value_t = 1e3, value_parser = positive)]
    max_kappa: f64,
    #[arg(long, env = "DISPLACE_SEED", default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Order of the swept matrices.
    #[arg(long, default_value_t = 32)]
    n: usize,
    /// Matrices per target condition number.
    #[arg(long, default_value_t = 3)]
    trials: usize,
    #[arg(long, default_value_t = 100)]
    probe_trials: usize,
    #[arg(long, default_value_t = 32)]
    probe_n: usize,
    /// Refinement steps for the semi-normal equations in the sweep.
    #[arg(long, default_value_t = 0)]
    refine: usize,
    #[arg(long, env = "DISPLACE_SEED", default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

/// Why a command did not succeed.
#[derive(Debug)]
pub enum Failure {
    /// Invalid combination of arguments or input kinds.
    Usage(String),
    /// A file could not be read or written.
    Io(String),
    Solver(DisplaceError),
    /// A computed check exceeded its threshold; the report was still written.
    Check {
        name: &'static str,
        message: String,
    },
}

impl From<DisplaceError> for Failure {
    fn from(e: DisplaceError) -> Self {
        Failure::Solver(e)
    }
}

impl Failure {
    fn name(&self) -> &'static str {
        match self {
            Failure::Usage(_) => "UsageError",
            Failure::Io(_) => "IoError",
            Failure::Solver(e) => e.name(),
            Failure::Check { name, .. } => name,
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_)
            | Failure::Io(_)
            | Failure::Solver(DisplaceError::ParseError { .. }) => 2,
            Failure::Solver(_) | Failure::Check { .. } => 1,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Usage(m) | Failure::Io(m) => m.clone(),
            Failure::Solver(e) => e.to_string(),
            Failure::Check { message, .. } => message.clone(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => commands::solve(&a),
        Command::Factor(a) => commands::factor(&a),
        Command::VerifyDisplacement(a) => commands::verify(&a),
        Command::Bench(a) => commands::bench(&a),
        Command::StabilityReport(a) => commands::stability(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error = {}", f.name());
            eprintln!("message = {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}
