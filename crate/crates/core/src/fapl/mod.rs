//! Accelerated prox-level method over a Euclidean ball.

mod localizer;
pub(crate) mod phase;
mod stepsize;

pub use localizer::{level_cut, prox_cut, update_localizer, Localizer};
pub use stepsize::{stepsize, StepsizeSchedule, StepsizeScheme};

use serde::{Deserialize, Serialize};

use crate::context::{RunContext, SmoothingSample, SolverObserver};
use crate::error::{check_dim, check_unit_interval, Result, SolverError};
use crate::oracle::{min_linear_over_ball, Ball, Evaluation, FirstOrderOracle, HolderClass};
use crate::projection::ProjectionConfig;
use crate::trace::{PhaseRecord, SolveReport, SolveStatus, Termination};

use phase::{run_phase, PhaseInput, PhaseModel, PhaseOutput, PhaseSettings};

/// Tuning shared by every level-type solver.
#[derive(Debug, Clone)]
pub struct LevelParams {
    pub beta: f64,
    pub theta: f64,
    pub scheme: StepsizeScheme,
    /// Level cuts kept in the bundle besides the prox half-space.
    pub memory_depth: usize,
    /// Per-phase safety cap; exceeding it is an error.
    pub max_phase_iter: usize,
    /// Iteration budget across all phases; exhausting it ends the run early.
    pub max_total_iter: Option<u64>,
    pub projection: ProjectionConfig,
    pub record_time: bool,
    pub record_iterates: bool,
}

impl Default for LevelParams {
    fn default() -> Self {
        Self {
            beta: 0.5,
            theta: 0.5,
            scheme: StepsizeScheme::Polynomial,
            memory_depth: 10,
            max_phase_iter: 100_000,
            max_total_iter: None,
            projection: ProjectionConfig::default(),
            record_time: false,
            record_iterates: false,
        }
    }
}

impl LevelParams {
    pub fn validate(&self) -> Result<()> {
        check_unit_interval("beta", self.beta)?;
        check_unit_interval("theta", self.theta)?;
        if self.max_phase_iter == 0 {
            return Err(SolverError::InvalidParameter {
                name: "max_phase_iter",
                reason: "must be at least 1".into(),
            });
        }
        if self.memory_depth + 2 > 30 {
            return Err(SolverError::InvalidParameter {
                name: "memory_depth",
                reason: format!("at most 28 level cuts fit the projection kernel, got {}", self.memory_depth),
            });
        }
        Ok(())
    }

    /// Guaranteed per-phase gap contraction factor.
    pub fn contraction(&self) -> f64 {
        contraction_factor(self.beta, self.theta)
    }

    pub(crate) fn settings(&self) -> PhaseSettings {
        let mut projection = self.projection;
        projection.max_cuts = projection.max_cuts.max(self.memory_depth + 2);
        PhaseSettings {
            beta: self.beta,
            theta: self.theta,
            scheme: self.scheme,
            memory_depth: self.memory_depth,
            projection,
        }
    }

    pub(crate) fn context<'o>(&self, observer: Option<&'o mut dyn SolverObserver>) -> RunContext<'o> {
        RunContext::new(self.record_time).with_observer(observer)
    }
}

/// `q = max{β, 1 − (1 − θ)β}`.
pub fn contraction_factor(beta: f64, theta: f64) -> f64 {
    beta.max(1.0 - (1.0 - theta) * beta)
}

/// Where the first lower bound comes from.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub enum LowerBoundInit {
    /// Minimum of the linear model at the starting point.
    #[default]
    Model,
    /// A known lower bound on `f*`, combined with the model bound.
    Known(f64),
}

/// Outcome of a single gap-reduction call.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseResult {
    pub x: Vec<f64>,
    pub ub: f64,
    pub lb: f64,
    pub termination: Termination,
    pub iterations: usize,
}

impl From<PhaseOutput> for PhaseResult {
    fn from(o: PhaseOutput) -> Self {
        Self {
            x: o.x,
            ub: o.ub,
            lb: o.lb,
            termination: o.termination,
            iterations: o.iterations,
        }
    }
}

pub(crate) struct OracleModel<'a, O: ?Sized> {
    pub oracle: &'a O,
}

impl<O: FirstOrderOracle + ?Sized> PhaseModel for OracleModel<'_, O> {
    fn lower(&mut self, ctx: &mut RunContext<'_>, x: &[f64]) -> Result<(Evaluation, Option<SmoothingSample>)> {
        Ok((ctx.eval(self.oracle, x), None))
    }

    fn upper(&mut self, ctx: &mut RunContext<'_>, x: &[f64]) -> Result<(f64, Option<SmoothingSample>)> {
        Ok((ctx.value(self.oracle, x), None))
    }

    fn smoothed(&mut self, _ctx: &mut RunContext<'_>, _x: &[f64]) -> Result<Option<f64>> {
        Ok(None)
    }
}

/// One gap-reduction phase of the accelerated prox-level method.
///
/// `x_hat` must lie in `ball` and `lb ≤ f* ≤ f(x_hat)` over the ball.
pub fn gap_reduction_fapl<O: FirstOrderOracle + ?Sized>(
    oracle: &O,
    ball: &Ball,
    x_hat: &[f64],
    lb: f64,
    params: &LevelParams,
) -> Result<PhaseResult> {
    params.validate()?;
    check_dim(ball.dim(), oracle.dim())?;
    check_dim(ball.dim(), x_hat.len())?;
    let mut ctx = params.context(None);
    let ub = ctx.value(oracle, x_hat);
    let out = run_phase(
        &mut OracleModel { oracle },
        &mut ctx,
        &params.settings(),
        PhaseInput {
            index: 1,
            ball,
            x_hat,
            ub,
            lb,
            max_iter: params.max_phase_iter,
        },
    )?;
    Ok(out.into())
}

pub(crate) struct Bounds {
    pub x: Vec<f64>,
    pub ub: f64,
    pub lb: f64,
}

/// `p₁ = argmin_ball h(p₀, ·)`, `lb₁ = h(p₀, p₁)`, `ub₁ = min{f(p₀), f(p₁)}`.
pub(crate) fn initial_bounds(
    ctx: &mut RunContext<'_>,
    ball: &Ball,
    p0: &[f64],
    ev0: &Evaluation,
    value_at: impl FnOnce(&mut RunContext<'_>, &[f64]) -> Result<f64>,
    lb_init: LowerBoundInit,
) -> Result<Bounds> {
    let (p1, h1) = min_linear_over_ball(ev0.value, &ev0.subgradient, p0, ball)?;
    let f1 = value_at(ctx, &p1)?;
    let (x, ub) = if f1 < ev0.value { (p1, f1) } else { (p0.to_vec(), ev0.value) };
    // h1 can exceed f by rounding when p0 already minimizes the model
    let h1 = h1.min(ub);
    let lb = match lb_init {
        LowerBoundInit::Model => h1,
        LowerBoundInit::Known(v) => h1.max(v),
    };
    if lb > ub {
        return Err(SolverError::InvalidParameter {
            name: "lower_bound",
            reason: format!("initial lower bound {lb:e} exceeds f(p) = {ub:e}"),
        });
    }
    ctx.record_init(lb, ub, f1);
    Ok(Bounds { x, ub, lb })
}

pub(crate) fn check_start(ball: &Ball, p0: &[f64]) -> Result<()> {
    check_dim(ball.dim(), p0.len())?;
    if !ball.contains(p0, 1e-9) {
        return Err(SolverError::InvalidParameter {
            name: "p0",
            reason: "starting point lies outside the feasible ball".into(),
        });
    }
    Ok(())
}

pub(crate) fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0) {
        return Err(SolverError::InvalidParameter {
            name: "eps",
            reason: format!("must be positive, got {eps}"),
        });
    }
    Ok(())
}

pub(crate) enum Budgeted {
    Done(PhaseOutput),
    Exhausted(Bounds),
}

/// Runs a phase under the global iteration budget. Hitting the per-phase cap
/// is an error; hitting the global budget is a normal early stop.
pub(crate) fn budgeted_phase<M: PhaseModel>(
    model: &mut M,
    ctx: &mut RunContext<'_>,
    params: &LevelParams,
    settings: &PhaseSettings,
    index: usize,
    ball: &Ball,
    current: &Bounds,
) -> Result<Budgeted> {
    let remaining = params
        .max_total_iter
        .map_or(u64::MAX, |cap| cap.saturating_sub(ctx.iterations()));
    if remaining == 0 {
        return Ok(Budgeted::Exhausted(Bounds {
            x: current.x.clone(),
            ub: current.ub,
            lb: current.lb,
        }));
    }
    let budget_binds = remaining < params.max_phase_iter as u64;
    let max_iter = if budget_binds { remaining as usize } else { params.max_phase_iter };
    let res = run_phase(
        model,
        ctx,
        settings,
        PhaseInput {
            index,
            ball,
            x_hat: &current.x,
            ub: current.ub,
            lb: current.lb,
            max_iter,
        },
    );
    match res {
        Ok(out) => Ok(Budgeted::Done(out)),
        Err(SolverError::IterationLimit {
            incumbent,
            incumbent_value,
            lower_bound,
            ..
        }) if budget_binds => Ok(Budgeted::Exhausted(Bounds {
            x: incumbent,
            ub: incumbent_value,
            lb: lower_bound,
        })),
        Err(e) => Err(e),
    }
}

pub(crate) fn phase_record(
    index: usize,
    before: &Bounds,
    out: &PhaseOutput,
    radius: f64,
    keep_iterate: bool,
) -> PhaseRecord {
    PhaseRecord {
        index,
        iterations: out.iterations,
        lb_in: before.lb,
        ub_in: before.ub,
        lb_out: out.lb,
        ub_out: out.ub,
        termination: out.termination,
        radius,
        d_in: None,
        d_out: None,
        eta: None,
        x_hat_in: keep_iterate.then(|| before.x.clone()),
    }
}

pub(crate) fn report(ctx: RunContext<'_>, b: Bounds, status: SolveStatus) -> SolveReport {
    let (trace, counts) = ctx.into_parts();
    SolveReport {
        x: b.x,
        ub: b.ub,
        lb: b.lb,
        status,
        counts,
        trace,
    }
}

/// Minimizes `f` over `ball` until `ub − lb ≤ eps`.
pub fn fapl_solve<O: FirstOrderOracle + ?Sized>(
    oracle: &O,
    ball: &Ball,
    p0: &[f64],
    eps: f64,
    lb_init: LowerBoundInit,
    params: &LevelParams,
    observer: Option<&mut dyn SolverObserver>,
) -> Result<SolveReport> {
    params.validate()?;
    check_eps(eps)?;
    check_dim(ball.dim(), oracle.dim())?;
    check_start(ball, p0)?;
    let settings = params.settings();
    let mut ctx = params.context(observer);

    let ev0 = ctx.eval(oracle, p0);
    let mut cur = initial_bounds(&mut ctx, ball, p0, &ev0, |c, x| Ok(c.value(oracle, x)), lb_init)?;
    let mut model = OracleModel { oracle };

    let mut index = 0;
    while cur.ub - cur.lb > eps {
        index += 1;
        match budgeted_phase(&mut model, &mut ctx, params, &settings, index, ball, &cur)? {
            Budgeted::Exhausted(b) => return Ok(report(ctx, b, SolveStatus::BudgetExhausted)),
            Budgeted::Done(out) => {
                let rec = phase_record(index, &cur, &out, ball.radius, params.record_iterates);
                ctx.push_phase(rec);
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

/// Iteration bound for one phase entered with gap `delta`:
/// `(c M R^{1+ρ} / ((1+ρ) θ β Δ))^{2/(1+3ρ)} + 1`.
pub fn fapl_phase_bound(class: HolderClass, radius: f64, params: &LevelParams, delta: f64) -> f64 {
    let HolderClass { m, rho } = class;
    let c = params.scheme.c_of_rho(rho);
    let base = c * m * radius.powf(1.0 + rho) / ((1.0 + rho) * params.theta * params.beta * delta);
    base.powf(2.0 / (1.0 + 3.0 * rho)) + 1.0
}

/// Number of phases needed to reach `eps`:
/// `⌈max{0, log_{1/q}((2R)^{1+ρ} M / ((1+ρ) ε))}⌉`.
pub fn fapl_phase_count_bound(class: HolderClass, radius: f64, params: &LevelParams, eps: f64) -> u64 {
    let HolderClass { m, rho } = class;
    let ratio = (2.0 * radius).powf(1.0 + rho) * m / ((1.0 + rho) * eps);
    let q = params.contraction();
    let s = (ratio.ln() / (1.0 / q).ln()).max(0.0);
    s.ceil() as u64
}
