//! Level methods for strongly convex objectives: every phase recenters the
//! ball at the incumbent and shrinks it to the certified trust radius.

use crate::context::{RunContext, SolverObserver};
use crate::error::{check_dim, check_positive, Result, SolverError};
use crate::fapl::{
    budgeted_phase, check_eps, phase_record, report, Bounds, Budgeted, LevelParams, OracleModel,
};
use crate::fusl::{fusl_phases, true_value, StructuredObjective};
use crate::oracle::{Ball, FirstOrderOracle};
use crate::trace::{SolveReport, SolveStatus};

/// `√(2Δ/μ)`: radius of a ball around any point with gap `Δ` that contains
/// the minimizer of a `μ`-strongly convex function.
pub fn trust_radius(delta: f64, mu: f64) -> f64 {
    (2.0 * delta.max(0.0) / mu).sqrt()
}

fn trust_ball(b: &Bounds, mu: f64) -> Result<Ball> {
    Ball::new(b.x.clone(), trust_radius(b.ub - b.lb, mu))
}

fn start<'o>(
    p0: &[f64],
    f0: f64,
    lb1: f64,
    mu: f64,
    eps: f64,
    params: &LevelParams,
    ctx: &mut RunContext<'o>,
) -> Result<Bounds> {
    params.validate()?;
    check_eps(eps)?;
    check_positive("mu", mu)?;
    if !lb1.is_finite() || lb1 > f0 {
        return Err(SolverError::InvalidParameter {
            name: "lb1",
            reason: format!("need a finite lower bound not above f(p0) = {f0:e}, got {lb1:e}"),
        });
    }
    ctx.record_init(lb1, f0, f0);
    Ok(Bounds {
        x: p0.to_vec(),
        ub: f0,
        lb: lb1,
    })
}

/// Accelerated prox-level method for a `μ`-strongly convex `f` on `ℝⁿ`
/// given a lower bound `lb1 ≤ f*`.
pub fn fapl_sc_solve<O: FirstOrderOracle + ?Sized>(
    oracle: &O,
    p0: &[f64],
    lb1: f64,
    mu: f64,
    eps: f64,
    params: &LevelParams,
    observer: Option<&mut dyn SolverObserver>,
) -> Result<SolveReport> {
    check_dim(oracle.dim(), p0.len())?;
    let mut ctx = params.context(observer);
    let f0 = ctx.value(oracle, p0);
    let mut cur = start(p0, f0, lb1, mu, eps, params, &mut ctx)?;
    let settings = params.settings();
    let mut model = OracleModel { oracle };
    let mut index = 0;
    while cur.ub - cur.lb > eps {
        index += 1;
        let ball = trust_ball(&cur, mu)?;
        match budgeted_phase(&mut model, &mut ctx, params, &settings, index, &ball, &cur)? {
            Budgeted::Exhausted(b) => return Ok(report(ctx, b, SolveStatus::BudgetExhausted)),
            Budgeted::Done(out) => {
                ctx.push_phase(phase_record(index, &cur, &out, ball.radius, params.record_iterates));
                cur = Bounds {
                    x: out.x,
                    ub: out.ub,
                    lb: out.lb,
                };
            }
        }
    }
    Ok(report(ctx, cur, SolveStatus::Converged))
}

/// Smoothed level method for a `μ`-strongly convex structured objective.
#[allow(clippy::too_many_arguments)]
pub fn fusl_sc_solve<S: StructuredObjective + ?Sized>(
    obj: &S,
    p0: &[f64],
    lb1: f64,
    mu: f64,
    d1: f64,
    eps: f64,
    params: &LevelParams,
    observer: Option<&mut dyn SolverObserver>,
) -> Result<SolveReport> {
    check_dim(obj.dim(), p0.len())?;
    check_positive("d1", d1)?;
    let mut ctx = params.context(observer);
    ctx.counts.exact += 1;
    let f0 = true_value(obj, p0, d1)?;
    let cur = start(p0, f0, lb1, mu, eps, params, &mut ctx)?;
    let ball_of = |b: &Bounds| trust_ball(b, mu);
    let (b, status, _) = fusl_phases(obj, &mut ctx, &ball_of, cur, d1, eps, params)?;
    Ok(report(ctx, b, status))
}

/// Phase count bound `⌈log_{1/q}((ub₁ − lb₁)/ε)⌉`.
pub fn sc_phase_count_bound(gap1: f64, eps: f64, params: &LevelParams) -> u64 {
    let q = params.contraction();
    ((gap1 / eps).ln() / (1.0 / q).ln()).ceil().max(0.0) as u64
}

/// Per-phase iteration bound `√(2cM/(θβμ)) + 1` for an `M`-smooth objective.
pub fn sc_phase_iteration_bound(lipschitz: f64, mu: f64, params: &LevelParams) -> f64 {
    let c = params.scheme.c_of_rho(1.0);
    (2.0 * c * lipschitz / (params.theta * params.beta * mu)).sqrt() + 1.0
}
