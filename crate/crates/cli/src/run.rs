use std::fmt;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::Path;
use std::time::Instant;

use levelforge::baselines::{nest_solve, NestConfig};
use levelforge::fusl::{fusl_solve, true_value, ExactObjective, StructuredObjective};
use levelforge::oracle::OracleCounts;
use levelforge::problems::{
    gen_least_squares, ls_oracle, phantom, tv_structured_objective, write_pgm, Distribution, ImageDims,
    LeastSquaresInstance, QuadraticInstance, TvInstance,
};
use levelforge::strongly_convex::{fapl_sc_solve, fusl_sc_solve};
use levelforge::unconstrained::{solve_unconstrained, FaplBallSolver, FuslBallSolver, UnconstrainedConfig};
use levelforge::{
    fapl_solve, Ball, ConvergenceTrace, Exec, FirstOrderOracle, LevelParams, LowerBoundInit, ProjectionConfig,
    SolveStatus, SolverError, StepsizeScheme,
};
use serde::Serialize;

use crate::args::{Dist, InnerSolver, LbMode, ProblemKind, Scheme, SolveArgs, SolverKind};

pub const SEED_ENV: &str = "LEVELFORGE_SEED";

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Solver(SolverError),
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Solver(SolverError::IterationLimit { .. }) => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) => write!(f, "config error: {msg}"),
            CliError::Solver(e) => write!(f, "solver error: {e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::InvalidParameter { .. } | SolverError::DimensionMismatch { .. } => {
                CliError::Config(e.to_string())
            }
            other => CliError::Solver(other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

fn config(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Seed after applying the environment override.
pub fn effective_seed(flag: u64) -> Result<u64, CliError> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| config(format!("{SEED_ENV} must be an unsigned integer, got {v:?}"))),
        Err(_) => Ok(flag),
    }
}

enum Problem {
    Ls(LeastSquaresInstance),
    Tv(TvInstance),
    Quad(QuadraticInstance),
}

impl Problem {
    fn dim(&self) -> usize {
        match self {
            Problem::Ls(p) => p.dim(),
            Problem::Tv(p) => p.dims.pixels(),
            Problem::Quad(p) => p.x_star.len(),
        }
    }
}

/// Everything a run writes to disk.
pub struct Outcome {
    pub summary: Summary,
    pub trace: ConvergenceTrace,
    images: Option<(ImageDims, Vec<f64>, Vec<f64>)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub problem: ProblemKind,
    pub solver: SolverKind,
    pub inner: Option<InnerSolver>,
    pub seed: u64,
    pub m: usize,
    pub n: usize,
    pub beta: f64,
    pub theta: f64,
    pub memory_depth: usize,
    pub eps: f64,
    pub lb_mode: LbMode,
    pub radius: f64,
    pub status: &'static str,
    pub iterations: u64,
    pub phases: usize,
    pub wall_time_s: f64,
    /// `‖Ax − b‖²` for ls, `f(x) − f*` for quad.
    pub accuracy: Option<f64>,
    pub objective: f64,
    pub lb: f64,
    pub gap: f64,
    pub relative_error: Option<f64>,
    pub oracle_calls: OracleCounts,
    pub smoothing_doublings: usize,
    pub expansions: Option<usize>,
}

impl Summary {
    pub fn converged(&self) -> bool {
        self.status == "converged"
    }
}

struct Resolved {
    seed: u64,
    m: usize,
    n: usize,
    eps: f64,
    radius: f64,
    exec: Exec,
}

fn resolve(args: &SolveArgs) -> Result<Resolved, CliError> {
    let seed = effective_seed(args.seed)?;
    let (m, n) = match args.problem {
        ProblemKind::Ls => (args.m.unwrap_or(200), args.n.unwrap_or(400)),
        ProblemKind::Tv => {
            let side = args.n.unwrap_or(16);
            (args.m.unwrap_or(side * side / 2), side)
        }
        ProblemKind::Quad => (0, args.n.unwrap_or(50)),
    };
    if n == 0 || (args.problem != ProblemKind::Quad && m == 0) {
        return Err(config("--m and --n must be positive"));
    }
    let eps = args.eps.unwrap_or(match args.problem {
        ProblemKind::Tv => 1e-3,
        _ => 1e-6,
    });
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(config(format!("--eps must be positive, got {eps}")));
    }
    for (name, v) in [("--beta", args.beta), ("--theta", args.theta)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(config(format!("{name} must lie in (0, 1), got {v}")));
        }
    }
    let radius = args.radius.unwrap_or(match args.problem {
        ProblemKind::Tv => ((n * n) as f64).sqrt(),
        _ => 1.0,
    });
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(config(format!("--radius must be positive, got {radius}")));
    }
    if args.mu.is_some_and(|mu| !(mu > 0.0 && mu.is_finite())) {
        return Err(config("--mu must be positive"));
    }
    let exec = if args.sequential { Exec::Sequential } else { Exec::default() };
    Ok(Resolved {
        seed,
        m,
        n,
        eps,
        radius,
        exec,
    })
}

fn build_problem(args: &SolveArgs, r: &Resolved) -> Result<Problem, CliError> {
    Ok(match args.problem {
        ProblemKind::Ls => {
            let dist = match args.dist {
                Dist::Uniform => Distribution::Uniform01,
                Dist::Gaussian => Distribution::Gaussian,
            };
            Problem::Ls(gen_least_squares(r.m, r.n, dist, r.seed)?)
        }
        ProblemKind::Tv => {
            let dims = ImageDims::square(r.n);
            let inst = TvInstance::generate(phantom(dims), dims, r.m, args.lambda_tv, args.sigma, r.seed)?;
            Problem::Tv(match args.mu {
                Some(mu) => inst.with_strong_convexity(mu),
                None => inst,
            })
        }
        ProblemKind::Quad => {
            let n = r.n;
            let phase = r.seed as f64;
            let x_star: Vec<f64> = (0..n)
                .map(|i| 0.5 * ((i as f64 + 1.0) * 0.618 + phase).sin() / (n as f64).sqrt())
                .collect();
            let mu = args.mu.unwrap_or(1.0);
            Problem::Quad(QuadraticInstance::generate(x_star, 0.0, mu, args.lipschitz, r.seed)?)
        }
    })
}

fn level_params(args: &SolveArgs, r: &Resolved) -> LevelParams {
    LevelParams {
        beta: args.beta,
        theta: args.theta,
        scheme: match args.stepsize {
            Scheme::Polynomial => StepsizeScheme::Polynomial,
            Scheme::Recursive => StepsizeScheme::Recursive,
        },
        memory_depth: args.memory_depth,
        max_total_iter: Some(args.max_iter),
        projection: ProjectionConfig {
            exec: r.exec,
            ..ProjectionConfig::default()
        },
        record_time: args.timing,
        ..LevelParams::default()
    }
}

fn lb_init(mode: LbMode) -> LowerBoundInit {
    match mode.finite() {
        Some(v) => LowerBoundInit::Known(v),
        None => LowerBoundInit::Model,
    }
}

struct Raw {
    x: Vec<f64>,
    ub: f64,
    lb: f64,
    status: SolveStatus,
    counts: OracleCounts,
    trace: ConvergenceTrace,
    expansions: Option<usize>,
}

fn with_oracle<T>(
    problem: &Problem,
    exec: Exec,
    f: impl FnOnce(&dyn FirstOrderOracle) -> Result<T, CliError>,
) -> Result<T, CliError> {
    match problem {
        Problem::Ls(inst) => f(&ls_oracle(inst, exec)),
        Problem::Quad(inst) => f(inst),
        Problem::Tv(inst) => {
            let obj = tv_structured_objective(inst, exec);
            f(&ExactObjective { obj: &obj })
        }
    }
}

fn tv_only<'a>(problem: &'a Problem, what: &str) -> Result<&'a TvInstance, CliError> {
    match problem {
        Problem::Tv(inst) => Ok(inst),
        _ => Err(config(format!("{what} needs a structured objective; use --problem tv"))),
    }
}

fn solve(args: &SolveArgs, r: &Resolved, problem: &Problem) -> Result<Raw, CliError> {
    let params = level_params(args, r);
    let n = problem.dim();
    let p0 = vec![0.0; n];
    let ball = Ball::new(vec![0.0; n], r.radius)?;
    let lb = lb_init(args.lb);
    let from_report = |rep: levelforge::SolveReport| Raw {
        x: rep.x,
        ub: rep.ub,
        lb: rep.lb,
        status: rep.status,
        counts: rep.counts,
        trace: rep.trace,
        expansions: None,
    };
    let sc_lb = || {
        args.lb
            .finite()
            .ok_or_else(|| config("strongly convex solvers need a finite --lb (zero or a value)"))
    };
    let sc_mu = || match (problem, args.mu) {
        (Problem::Quad(q), _) => Ok(q.mu),
        (Problem::Tv(_), Some(mu)) => Ok(mu),
        (Problem::Tv(_), None) => Err(config("--mu is required for strongly convex tv runs")),
        (Problem::Ls(_), _) => Err(config(
            "least squares is not strongly convex; use --problem quad or --problem tv with --mu",
        )),
    };

    match args.solver {
        SolverKind::Fapl => with_oracle(problem, r.exec, |o| {
            Ok(from_report(fapl_solve(o, &ball, &p0, r.eps, lb, &params, None)?))
        }),
        SolverKind::Fusl => {
            let inst = tv_only(problem, "fusl")?;
            let obj = tv_structured_objective(inst, r.exec);
            Ok(from_report(fusl_solve(&obj, &ball, &p0, args.d1, r.eps, lb, &params, None)?))
        }
        SolverKind::FaplSc => {
            let (lb1, mu) = (sc_lb()?, sc_mu()?);
            with_oracle(problem, r.exec, |o| {
                Ok(from_report(fapl_sc_solve(o, &p0, lb1, mu, r.eps, &params, None)?))
            })
        }
        SolverKind::FuslSc => {
            let (lb1, mu) = (sc_lb()?, sc_mu()?);
            let inst = tv_only(problem, "fusl-sc")?;
            let obj = tv_structured_objective(inst, r.exec);
            Ok(from_report(fusl_sc_solve(&obj, &p0, lb1, mu, args.d1, r.eps, &params, None)?))
        }
        SolverKind::Unconstrained => {
            let cfg = UnconstrainedConfig {
                r0: args.r0,
                eps_stop: r.eps,
                exec: r.exec,
                ..UnconstrainedConfig::default()
            };
            let rep = match args.inner {
                InnerSolver::Fapl => with_oracle(problem, r.exec, |o| {
                    let s = FaplBallSolver {
                        oracle: o,
                        params: params.clone(),
                        lb_init: lb,
                    };
                    Ok(solve_unconstrained(&s, &p0, &cfg)?)
                })?,
                InnerSolver::Fusl => {
                    let inst = tv_only(problem, "--inner fusl")?;
                    let obj = tv_structured_objective(inst, r.exec);
                    let s = FuslBallSolver {
                        obj: &obj,
                        params: params.clone(),
                        lb_init: lb,
                        d1: args.d1,
                    };
                    solve_unconstrained(&s, &p0, &cfg)?
                }
            };
            Ok(Raw {
                x: rep.x,
                ub: rep.value,
                lb: rep.value - rep.state.delta,
                status: rep.status,
                counts: rep.counts,
                trace: rep.trace,
                expansions: Some(rep.state.expansions),
            })
        }
        SolverKind::Nest => {
            let (lipschitz, f_star) = match problem {
                Problem::Ls(inst) => (inst.lipschitz(r.exec), 0.0),
                Problem::Quad(inst) => (inst.lipschitz, inst.f_star),
                Problem::Tv(_) => return Err(config("nest needs a smooth objective; use --problem ls or quad")),
            };
            let cfg = NestConfig {
                lipschitz,
                max_iter: args.max_iter,
                target: Some(f_star + r.eps),
                record_time: args.timing,
            };
            with_oracle(problem, r.exec, |o| Ok(from_report(nest_solve(o, &ball, &p0, &cfg)?)))
        }
    }
}

/// Builds the instance, runs the solver and collects the summary.
pub fn execute(args: &SolveArgs) -> Result<Outcome, CliError> {
    let r = resolve(args)?;
    let problem = build_problem(args, &r)?;
    let start = Instant::now();
    let raw = solve(args, &r, &problem)?;
    let wall_time_s = start.elapsed().as_secs_f64();

    let (accuracy, objective, relative_error, images) = match &problem {
        Problem::Ls(inst) => {
            let e = ls_oracle(inst, r.exec).value(&raw.x);
            (Some(e), e, None, None)
        }
        Problem::Quad(inst) => {
            let f = inst.value(&raw.x);
            (Some(f - inst.f_star), f, None, None)
        }
        Problem::Tv(inst) => {
            let obj = tv_structured_objective(inst, r.exec);
            let f = true_value(&obj, &raw.x, obj.dual_diameter().unwrap_or(1.0))?;
            let img = Some((inst.dims, inst.u_true.clone(), raw.x.clone()));
            (None, f, Some(inst.relative_error(&raw.x)), img)
        }
    };
    let smoothing_doublings = raw
        .trace
        .phases
        .iter()
        .filter(|p| !p.termination.is_significant())
        .count();

    let summary = Summary {
        problem: args.problem,
        solver: args.solver,
        inner: (args.solver == SolverKind::Unconstrained).then_some(args.inner),
        seed: r.seed,
        m: r.m,
        n: r.n,
        beta: args.beta,
        theta: args.theta,
        memory_depth: args.memory_depth,
        eps: r.eps,
        lb_mode: args.lb,
        radius: r.radius,
        status: match raw.status {
            SolveStatus::Converged => "converged",
            SolveStatus::BudgetExhausted => "budget_exhausted",
        },
        iterations: raw.trace.total_iterations(),
        phases: raw.trace.phases.len(),
        wall_time_s,
        accuracy,
        objective,
        lb: raw.lb,
        gap: raw.ub - raw.lb,
        relative_error,
        oracle_calls: raw.counts,
        smoothing_doublings,
        expansions: raw.expansions,
    };
    Ok(Outcome {
        summary,
        trace: raw.trace,
        images,
    })
}

/// Writes `trace.csv`, `summary.json` and, for tv, `truth.pgm` and
/// `reconstruction.pgm` into `dir`.
pub fn write_outputs(outcome: &Outcome, dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    outcome.trace.write_csv(BufWriter::new(File::create(dir.join("trace.csv"))?))?;
    let json = serde_json::to_string_pretty(&outcome.summary).map_err(std::io::Error::other)?;
    fs::write(dir.join("summary.json"), json + "\n")?;
    if let Some((dims, truth, recon)) = &outcome.images {
        write_pgm(BufWriter::new(File::create(dir.join("truth.pgm"))?), truth, *dims)?;
        write_pgm(BufWriter::new(File::create(dir.join("reconstruction.pgm"))?), recon, *dims)?;
    }
    Ok(())
}

pub fn run_solve(args: &SolveArgs) -> Result<u8, CliError> {
    let outcome = execute(args)?;
    write_outputs(&outcome, &args.out_dir)?;
    let s = &outcome.summary;
    println!(
        "{} after {} iterations ({} phases, {:.3}s): objective {:e}, gap {:e}{}",
        s.status,
        s.iterations,
        s.phases,
        s.wall_time_s,
        s.objective,
        s.gap,
        s.accuracy.map(|a| format!(", accuracy {a:e}")).unwrap_or_default(),
    );
    Ok(if s.converged() { 0 } else { 2 })
}
