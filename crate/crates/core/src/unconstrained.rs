//! Unconstrained minimization through ball-constrained solves with radius
//! doubling.

use serde::{Deserialize, Serialize};

use crate::error::{check_positive, Result};
use crate::fapl::{fapl_solve, LevelParams, LowerBoundInit};
use crate::fusl::{fusl_solve, ExactObjective, StructuredObjective};
use crate::linalg::Exec;
use crate::oracle::{min_linear_over_ball, Ball, Evaluation, FirstOrderOracle, OracleCounts};
use crate::trace::{ConvergenceTrace, SolveReport, SolveStatus};

/// An `ε`-solver for `min_{x ∈ ball} f(x)`.
pub trait BallSolver: Sync {
    fn dim(&self) -> usize;

    /// `f` and a subgradient at `x`.
    fn evaluate(&self, x: &[f64]) -> Result<Evaluation>;

    /// Returns a point of `ball` whose value is within `eps` of the ball
    /// minimum. `start` lies in `ball`.
    fn solve(&self, ball: &Ball, start: &[f64], eps: f64) -> Result<SolveReport>;
}

pub struct FaplBallSolver<'a, O: ?Sized> {
    pub oracle: &'a O,
    pub params: LevelParams,
    pub lb_init: LowerBoundInit,
}

impl<O: FirstOrderOracle + ?Sized> BallSolver for FaplBallSolver<'_, O> {
    fn dim(&self) -> usize {
        self.oracle.dim()
    }

    fn evaluate(&self, x: &[f64]) -> Result<Evaluation> {
        Ok(self.oracle.eval(x))
    }

    fn solve(&self, ball: &Ball, start: &[f64], eps: f64) -> Result<SolveReport> {
        fapl_solve(self.oracle, ball, start, eps, self.lb_init, &self.params, None)
    }
}

pub struct FuslBallSolver<'a, S: ?Sized> {
    pub obj: &'a S,
    pub params: LevelParams,
    pub lb_init: LowerBoundInit,
    pub d1: f64,
}

impl<S: StructuredObjective + ?Sized> BallSolver for FuslBallSolver<'_, S> {
    fn dim(&self) -> usize {
        self.obj.dim()
    }

    fn evaluate(&self, x: &[f64]) -> Result<Evaluation> {
        Ok(ExactObjective { obj: self.obj }.eval(x))
    }

    fn solve(&self, ball: &Ball, start: &[f64], eps: f64) -> Result<SolveReport> {
        fusl_solve(self.obj, ball, start, self.d1, eps, self.lb_init, &self.params, None)
    }
}

/// `Δ₀ = f(x̄) − min_{x ∈ B(x̄, r₀)} h(x̄, x) = r₀ ‖f'(x̄)‖`.
pub fn initial_gap<O: FirstOrderOracle + ?Sized>(oracle: &O, x_bar: &[f64], r0: f64) -> Result<f64> {
    check_positive("r0", r0)?;
    gap_from(&oracle.eval(x_bar), x_bar, r0)
}

fn gap_from(ev: &Evaluation, x_bar: &[f64], r0: f64) -> Result<f64> {
    let ball = Ball::new(x_bar.to_vec(), r0)?;
    let (_, h) = min_linear_over_ball(ev.value, &ev.subgradient, x_bar, &ball)?;
    Ok((ev.value - h).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnconstrainedConfig {
    pub r0: f64,
    /// Stop once `Δ_k ≤ eps_stop / 8`.
    pub eps_stop: f64,
    /// Stop once `f(x_k*) − f* ≤ tol` for a known `(f*, tol)`.
    pub known_optimum: Option<(f64, f64)>,
    /// Upper limit on the number of solver pairs.
    pub max_rounds: usize,
    /// Run the two solves of a round concurrently.
    pub exec: Exec,
}

impl Default for UnconstrainedConfig {
    fn default() -> Self {
        Self {
            r0: 1.0,
            eps_stop: 1e-6,
            known_optimum: None,
            max_rounds: 200,
            exec: Exec::Sequential,
        }
    }
}

/// State of the radius/target-gap search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionState {
    pub radius: f64,
    pub delta: f64,
    pub x_star: Vec<f64>,
    pub f_star: f64,
    pub expansions: usize,
}

/// One pair of ball solves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub radius: f64,
    pub delta: f64,
    pub f_inner: f64,
    pub f_outer: f64,
    pub expanded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnconstrainedReport {
    pub x: Vec<f64>,
    pub value: f64,
    pub state: ExpansionState,
    pub rounds: Vec<RoundRecord>,
    /// `f(x_k*)` after each commit.
    pub committed_values: Vec<f64>,
    pub status: SolveStatus,
    pub counts: OracleCounts,
    pub trace: ConvergenceTrace,
}

fn start_in(ball: &Ball, incumbent: &[f64]) -> Vec<f64> {
    if ball.contains(incumbent, 1e-12) {
        incumbent.to_vec()
    } else {
        ball.center.clone()
    }
}

/// Guess-and-check radius search around the fixed center `x_bar`.
///
/// Each round solves over `B(x̄, r)` and `B(x̄, 2r)` to accuracy `Δ`; a value
/// difference above `Δ` doubles `r`, otherwise the larger-ball point is
/// committed and `Δ` is halved. Each solve starts from the incumbent when it
/// lies in the ball, so committed values never increase.
pub fn solve_unconstrained<B: BallSolver + ?Sized>(
    solver: &B,
    x_bar: &[f64],
    cfg: &UnconstrainedConfig,
) -> Result<UnconstrainedReport> {
    check_positive("r0", cfg.r0)?;
    check_positive("eps_stop", cfg.eps_stop)?;
    crate::error::check_dim(solver.dim(), x_bar.len())?;

    let ev0 = solver.evaluate(x_bar)?;
    let mut counts = OracleCounts {
        first_order: 1,
        ..OracleCounts::default()
    };
    let mut state = ExpansionState {
        radius: cfg.r0,
        delta: gap_from(&ev0, x_bar, cfg.r0)?,
        x_star: x_bar.to_vec(),
        f_star: ev0.value,
        expansions: 0,
    };
    let mut trace = ConvergenceTrace::default();
    let mut rounds = Vec::new();
    let mut committed_values = Vec::new();

    let done = |s: &ExpansionState| {
        s.delta <= cfg.eps_stop / 8.0 || cfg.known_optimum.is_some_and(|(f, tol)| s.f_star - f <= tol)
    };

    let mut status = SolveStatus::Converged;
    while !done(&state) {
        if rounds.len() >= cfg.max_rounds {
            status = SolveStatus::BudgetExhausted;
            break;
        }
        let inner = Ball::new(x_bar.to_vec(), state.radius)?;
        let outer = Ball::new(x_bar.to_vec(), 2.0 * state.radius)?;
        let s_in = start_in(&inner, &state.x_star);
        let s_out = start_in(&outer, &state.x_star);
        let (r_in, r_out) = solve_pair(solver, (&inner, &s_in), (&outer, &s_out), state.delta, cfg.exec);
        let (r_in, r_out) = (r_in?, r_out?);
        for r in [&r_in, &r_out] {
            counts.merge(&r.counts);
            trace.append(&r.trace);
        }

        let expanded = r_in.ub - r_out.ub > state.delta;
        rounds.push(RoundRecord {
            radius: state.radius,
            delta: state.delta,
            f_inner: r_in.ub,
            f_outer: r_out.ub,
            expanded,
        });
        if r_in.status == SolveStatus::BudgetExhausted || r_out.status == SolveStatus::BudgetExhausted {
            status = SolveStatus::BudgetExhausted;
            break;
        }
        if expanded {
            state.radius *= 2.0;
            state.expansions += 1;
        } else {
            // the incumbent lies in the outer ball, so keeping it when it is
            // no worse still yields a Δ-solution there
            if r_out.ub < state.f_star {
                state.x_star = r_out.x;
                state.f_star = r_out.ub;
            }
            state.delta /= 2.0;
            committed_values.push(state.f_star);
        }
    }

    Ok(UnconstrainedReport {
        x: state.x_star.clone(),
        value: state.f_star,
        state,
        rounds,
        committed_values,
        status,
        counts,
        trace,
    })
}

type Pair = (Result<SolveReport>, Result<SolveReport>);

fn solve_pair<B: BallSolver + ?Sized>(
    solver: &B,
    inner: (&Ball, &[f64]),
    outer: (&Ball, &[f64]),
    eps: f64,
    exec: Exec,
) -> Pair {
    let a = || solver.solve(inner.0, inner.1, eps);
    let b = || solver.solve(outer.0, outer.1, eps);
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return rayon::join(a, b);
    }
    let _ = exec;
    (a(), b())
}
