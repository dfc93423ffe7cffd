use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "levelforge", version, about = "Level-method solvers and their benchmark harness")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build one instance, run one solver, write trace.csv and summary.json.
    Solve(SolveArgs),
    /// Run a property suite and print one PASS/FAIL line per check.
    Audit(AuditArgs),
    /// Run a grid of (beta, theta, memory depth) settings on one instance.
    Sweep(SweepArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    /// Least squares over the unit ball, `e_k = ‖Ax − b‖²`.
    Ls,
    /// Total-variation image reconstruction of a phantom.
    Tv,
    /// Random strongly convex quadratic with minimizer on a known point.
    Quad,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dist {
    Uniform,
    Gaussian,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    Fapl,
    Fusl,
    FaplSc,
    FuslSc,
    Unconstrained,
    Nest,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InnerSolver {
    Fapl,
    Fusl,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Polynomial,
    Recursive,
}

/// Initial lower bound: `zero`, `minus-infinity` (linear model only) or a
/// number.
#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LbMode {
    Zero,
    MinusInfinity,
    Value(f64),
}

impl FromStr for LbMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "zero" => Ok(LbMode::Zero),
            "minus-infinity" => Ok(LbMode::MinusInfinity),
            other => other
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map(LbMode::Value)
                .ok_or_else(|| format!("expected zero, minus-infinity or a finite number, got {other:?}")),
        }
    }
}

impl LbMode {
    pub fn finite(self) -> Option<f64> {
        match self {
            LbMode::Zero => Some(0.0),
            LbMode::MinusInfinity => None,
            LbMode::Value(v) => Some(v),
        }
    }
}

#[derive(Args, Clone, Debug, Serialize)]
pub struct SolveArgs {
    #[arg(long, value_enum, default_value_t = ProblemKind::Ls)]
    pub problem: ProblemKind,

    #[arg(long, value_enum, default_value_t = Dist::Uniform)]
    pub dist: Dist,

    /// Rows of A (ls) or number of measurements (tv).
    #[arg(long)]
    pub m: Option<usize>,

    /// Variables (ls, quad) or image side length (tv).
    #[arg(long)]
    pub n: Option<usize>,

    /// Overridden by LEVELFORGE_SEED when set.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    #[arg(long, value_enum, default_value_t = SolverKind::Fapl)]
    pub solver: SolverKind,

    /// Ball solver used by `--solver unconstrained`.
    #[arg(long, value_enum, default_value_t = InnerSolver::Fapl)]
    pub inner: InnerSolver,

    #[arg(long, default_value_t = 0.5)]
    pub beta: f64,

    #[arg(long, default_value_t = 0.5)]
    pub theta: f64,

    #[arg(long, default_value_t = 10)]
    pub memory_depth: usize,

    #[arg(long, value_enum, default_value_t = Scheme::Polynomial)]
    pub stepsize: Scheme,

    /// Target gap (target accuracy for nest); defaults to 1e-6, or 1e-3 for tv.
    #[arg(long)]
    pub eps: Option<f64>,

    #[arg(long, default_value = "minus-infinity", allow_hyphen_values = true)]
    pub lb: LbMode,

    /// Initial dual-size estimate for the smoothed solvers.
    #[arg(long, default_value_t = 1.0)]
    pub d1: f64,

    /// Strong convexity modulus (required by fapl-sc, fusl-sc and quad).
    #[arg(long)]
    pub mu: Option<f64>,

    /// Initial radius of the unconstrained wrapper.
    #[arg(long, default_value_t = 1.0)]
    pub r0: f64,

    /// Radius of the feasible ball centred at 0; defaults to 1, or √N for tv.
    #[arg(long)]
    pub radius: Option<f64>,

    /// Smoothness constant of the quad problem.
    #[arg(long, default_value_t = 10.0)]
    pub lipschitz: f64,

    /// Iteration budget across all phases.
    #[arg(long, default_value_t = 10_000)]
    pub max_iter: u64,

    #[arg(long, default_value_t = 0.05)]
    pub lambda_tv: f64,

    /// Measurement noise level for tv.
    #[arg(long, default_value_t = 0.01)]
    pub sigma: f64,

    #[arg(long, default_value = "levelforge-out")]
    pub out_dir: PathBuf,

    /// Record per-iteration wall time in the trace (breaks byte-identity).
    #[arg(long)]
    pub timing: bool,

    /// Disable the rayon kernels for this run.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Invariants,
}

#[derive(Args, Clone, Debug)]
pub struct AuditArgs {
    #[arg(long, value_enum, default_value_t = Suite::Invariants)]
    pub suite: Suite,

    #[arg(long, default_value_t = 7)]
    pub seed: u64,
}

#[derive(Args, Clone, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub base: SolveArgs,

    #[arg(long, value_delimiter = ',', default_values_t = [0.3, 0.5, 0.7])]
    pub betas: Vec<f64>,

    #[arg(long, value_delimiter = ',', default_values_t = [0.3, 0.5, 0.7])]
    pub thetas: Vec<f64>,

    #[arg(long, value_delimiter = ',', default_values_t = [5, 10])]
    pub memory_depths: Vec<usize>,

    /// Worker threads; 1 runs the grid sequentially.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}
