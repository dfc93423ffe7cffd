//! Smoothed level method for `f = f̂ + F` with `F(x) = max_{y∈Y} <Ax, y> − ĝ(y)`.

use crate::context::{RunContext, SmoothingSample, SolverObserver};
use crate::error::{check_dim, check_positive, Result};
use crate::fapl::phase::PhaseModel;
use crate::fapl::{
    budgeted_phase, check_eps, check_start, initial_bounds, phase_record, report, Bounds, Budgeted, LevelParams,
    LowerBoundInit, PhaseResult,
};
use crate::linalg::{add, norm_inf};
use crate::oracle::{Ball, Evaluation, FirstOrderOracle};
use crate::trace::{SolveReport, SolveStatus, Termination};

/// Composite objective `f̂(x) + max_{y∈Y} {<Ax, y> − ĝ(y)}` with prox-function
/// `v` on `Y`.
pub trait StructuredObjective: Sync {
    fn dim(&self) -> usize;

    fn dual_dim(&self) -> usize;

    /// `f̂(x)` and `∇f̂(x)`.
    fn smooth_part(&self, x: &[f64]) -> Evaluation;

    /// `Ax`.
    fn apply(&self, x: &[f64]) -> Vec<f64>;

    /// `Aᵀy`.
    fn apply_adjoint(&self, y: &[f64]) -> Vec<f64>;

    /// `y* = argmax_{y∈Y} <w, y> − ĝ(y) − η v(y)` and the attained value.
    /// `eta = 0` asks for an exact maximizer, which implementations may refuse.
    fn dual_prox(&self, w: &[f64], eta: f64) -> Result<(Vec<f64>, f64)>;

    /// Strong convexity modulus of `v`.
    fn sigma_v(&self) -> f64 {
        1.0
    }

    /// `F` as a function of `w = Ax`, when a closed form exists.
    fn exact_nonsmooth(&self, _w: &[f64]) -> Option<f64> {
        None
    }

    /// `D_{v,Y} = max_{y∈Y} v(y)`, when known.
    fn dual_diameter(&self) -> Option<f64> {
        None
    }
}

/// `f_η(x) = f̂(x) + F_η(x)` with gradient `∇f̂(x) + Aᵀ y*(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothedEval {
    pub f_eta: f64,
    pub grad: Vec<f64>,
    pub y_star: Vec<f64>,
}

pub fn smoothed_eval<S: StructuredObjective + ?Sized>(obj: &S, eta: f64, x: &[f64]) -> Result<SmoothedEval> {
    check_positive("eta", eta)?;
    check_dim(obj.dim(), x.len())?;
    let sp = obj.smooth_part(x);
    let w = obj.apply(x);
    let (y_star, f_big) = obj.dual_prox(&w, eta)?;
    let grad = add(&sp.subgradient, &obj.apply_adjoint(&y_star));
    Ok(SmoothedEval {
        f_eta: sp.value + f_big,
        grad,
        y_star,
    })
}

/// `F(x)` from `w = Ax`: closed form if available, otherwise a tiny-η dual
/// prox value lifted by `η·D`.
fn nonsmooth_value<S: StructuredObjective + ?Sized>(obj: &S, w: &[f64], d_estimate: f64) -> Result<f64> {
    if let Some(v) = obj.exact_nonsmooth(w) {
        return Ok(v);
    }
    let eta = 1e-12 * norm_inf(w).max(1.0);
    let (_, v) = obj.dual_prox(w, eta)?;
    Ok(v + eta * d_estimate)
}

/// Exact value of `f` at `x`.
pub fn true_value<S: StructuredObjective + ?Sized>(obj: &S, x: &[f64], d_estimate: f64) -> Result<f64> {
    check_dim(obj.dim(), x.len())?;
    let w = obj.apply(x);
    Ok(obj.smooth_part(x).value + nonsmooth_value(obj, &w, d_estimate)?)
}

/// Whether `F_η(x) ≤ F(x) ≤ F_η(x) + η D` holds within `1e-9 (1 + |F(x)|)`;
/// `None` if `F` has no closed form.
pub fn sandwich_check<S: StructuredObjective + ?Sized>(obj: &S, eta: f64, x: &[f64], d_vy: f64) -> Result<Option<bool>> {
    check_positive("eta", eta)?;
    let w = obj.apply(x);
    let Some(f_exact) = obj.exact_nonsmooth(&w) else {
        return Ok(None);
    };
    let (_, f_eta) = obj.dual_prox(&w, eta)?;
    let tol = 1e-9 * (1.0 + f_exact.abs());
    Ok(Some(f_eta <= f_exact + tol && f_exact <= f_eta + eta * d_vy + tol))
}

/// True `f` with the subgradient `∇f̂ + Aᵀ y*` taken at `η = 0`, so black-box
/// solvers can run on a structured objective.
pub struct ExactObjective<'a, S: ?Sized> {
    pub obj: &'a S,
}

impl<S: StructuredObjective + ?Sized> FirstOrderOracle for ExactObjective<'_, S> {
    fn dim(&self) -> usize {
        self.obj.dim()
    }

    fn eval(&self, x: &[f64]) -> Evaluation {
        exact_subgradient(self.obj, x, 1.0).expect("dual prox failed while evaluating the exact objective")
    }

    fn value(&self, x: &[f64]) -> f64 {
        true_value(self.obj, x, 1.0).expect("dual prox failed while evaluating the exact objective")
    }
}

fn exact_subgradient<S: StructuredObjective + ?Sized>(obj: &S, x: &[f64], d_estimate: f64) -> Result<Evaluation> {
    check_dim(obj.dim(), x.len())?;
    let sp = obj.smooth_part(x);
    let w = obj.apply(x);
    let y = match obj.dual_prox(&w, 0.0) {
        Ok((y, _)) => y,
        Err(_) => obj.dual_prox(&w, 1e-12 * norm_inf(&w).max(1.0))?.0,
    };
    let value = sp.value + nonsmooth_value(obj, &w, d_estimate)?;
    Ok(Evaluation {
        value,
        subgradient: add(&sp.subgradient, &obj.apply_adjoint(&y)),
    })
}

struct SmoothedModel<'a, S: ?Sized> {
    obj: &'a S,
    eta: f64,
    d: f64,
}

impl<S: StructuredObjective + ?Sized> SmoothedModel<'_, S> {
    fn both(&self, x: &[f64], with_grad: bool) -> Result<(Evaluation, SmoothingSample)> {
        let sp = self.obj.smooth_part(x);
        let w = self.obj.apply(x);
        let (y, f_big_eta) = self.obj.dual_prox(&w, self.eta)?;
        let f_big = nonsmooth_value(self.obj, &w, self.d)?;
        let subgradient = if with_grad {
            add(&sp.subgradient, &self.obj.apply_adjoint(&y))
        } else {
            Vec::new()
        };
        let sample = SmoothingSample {
            eta: self.eta,
            f_eta: sp.value + f_big_eta,
            f_true: sp.value + f_big,
        };
        Ok((
            Evaluation {
                value: sample.f_eta,
                subgradient,
            },
            sample,
        ))
    }
}

impl<S: StructuredObjective + ?Sized> PhaseModel for SmoothedModel<'_, S> {
    fn lower(&mut self, ctx: &mut RunContext<'_>, x: &[f64]) -> Result<(Evaluation, Option<SmoothingSample>)> {
        ctx.counts.first_order += 1;
        let (ev, s) = self.both(x, true)?;
        Ok((ev, Some(s)))
    }

    fn upper(&mut self, ctx: &mut RunContext<'_>, x: &[f64]) -> Result<(f64, Option<SmoothingSample>)> {
        ctx.counts.exact += 1;
        let (_, s) = self.both(x, false)?;
        Ok((s.f_true, Some(s)))
    }

    fn smoothed(&mut self, ctx: &mut RunContext<'_>, x: &[f64]) -> Result<Option<f64>> {
        ctx.counts.value += 1;
        let (_, s) = self.both(x, false)?;
        Ok(Some(s.f_eta))
    }
}

/// `η = θ (f̄₀ − l) / (2D)` with `f̄₀ − l = β (ub − lb)`.
pub fn phase_eta(params: &LevelParams, ub: f64, lb: f64, d: f64) -> f64 {
    params.theta * params.beta * (ub - lb) / (2.0 * d)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FuslPhaseResult {
    pub phase: PhaseResult,
    pub d_plus: f64,
    pub eta: f64,
}

fn next_d(d: f64, termination: Termination) -> f64 {
    match termination {
        Termination::SmoothingDoubled => 2.0 * d,
        _ => d,
    }
}

/// One gap-reduction phase of the smoothed level method with dual-size
/// estimate `d`.
pub fn gap_reduction_fusl<S: StructuredObjective + ?Sized>(
    obj: &S,
    ball: &Ball,
    x_hat: &[f64],
    d: f64,
    lb: f64,
    params: &LevelParams,
) -> Result<FuslPhaseResult> {
    params.validate()?;
    check_positive("d", d)?;
    check_dim(ball.dim(), obj.dim())?;
    check_dim(ball.dim(), x_hat.len())?;
    let mut ctx = params.context(None);
    ctx.counts.exact += 1;
    let ub = true_value(obj, x_hat, d)?;
    let eta = phase_eta(params, ub, lb, d);
    let mut model = SmoothedModel { obj, eta, d };
    let out = crate::fapl::phase::run_phase(
        &mut model,
        &mut ctx,
        &params.settings(),
        crate::fapl::phase::PhaseInput {
            index: 1,
            ball,
            x_hat,
            ub,
            lb,
            max_iter: params.max_phase_iter,
        },
    )?;
    let d_plus = next_d(d, out.termination);
    Ok(FuslPhaseResult {
        phase: out.into(),
        d_plus,
        eta,
    })
}

/// Minimizes `f̂ + F` over `ball` until `ub − lb ≤ eps`, starting from the
/// dual-size guess `d1`.
#[allow(clippy::too_many_arguments)]
pub fn fusl_solve<S: StructuredObjective + ?Sized>(
    obj: &S,
    ball: &Ball,
    p0: &[f64],
    d1: f64,
    eps: f64,
    lb_init: LowerBoundInit,
    params: &LevelParams,
    observer: Option<&mut dyn SolverObserver>,
) -> Result<SolveReport> {
    params.validate()?;
    check_eps(eps)?;
    check_positive("d1", d1)?;
    check_dim(ball.dim(), obj.dim())?;
    check_start(ball, p0)?;
    let mut ctx = params.context(observer);
    let cur = fusl_init(obj, &mut ctx, ball, p0, d1, lb_init)?;
    let fixed = |_: &Bounds| Ok(ball.clone());
    let (b, status, _) = fusl_phases(obj, &mut ctx, &fixed, cur, d1, eps, params)?;
    Ok(report(ctx, b, status))
}

pub(crate) fn fusl_init<S: StructuredObjective + ?Sized>(
    obj: &S,
    ctx: &mut RunContext<'_>,
    ball: &Ball,
    p0: &[f64],
    d: f64,
    lb_init: LowerBoundInit,
) -> Result<Bounds> {
    ctx.counts.first_order += 1;
    let ev0 = exact_subgradient(obj, p0, d)?;
    initial_bounds(
        ctx,
        ball,
        p0,
        &ev0,
        |c, x| {
            c.counts.exact += 1;
            true_value(obj, x, d)
        },
        lb_init,
    )
}

/// Runs phases from `cur` until the gap is below `eps` or the budget runs out.
/// `ball_of` picks the feasible ball for each phase from the current bounds.
/// Returns the final bounds, the status and the final dual-size estimate.
pub(crate) fn fusl_phases<S: StructuredObjective + ?Sized>(
    obj: &S,
    ctx: &mut RunContext<'_>,
    ball_of: &dyn Fn(&Bounds) -> Result<Ball>,
    mut cur: Bounds,
    mut d: f64,
    eps: f64,
    params: &LevelParams,
) -> Result<(Bounds, SolveStatus, f64)> {
    let settings = params.settings();
    let mut index = 0;
    while cur.ub - cur.lb > eps {
        index += 1;
        let ball = &ball_of(&cur)?;
        let eta = phase_eta(params, cur.ub, cur.lb, d);
        let mut model = SmoothedModel { obj, eta, d };
        match budgeted_phase(&mut model, ctx, params, &settings, index, ball, &cur)? {
            Budgeted::Exhausted(b) => return Ok((b, SolveStatus::BudgetExhausted, d)),
            Budgeted::Done(out) => {
                let d_out = next_d(d, out.termination);
                let mut rec = phase_record(index, &cur, &out, ball.radius, params.record_iterates);
                rec.d_in = Some(d);
                rec.d_out = Some(d_out);
                rec.eta = Some(eta);
                ctx.push_phase(rec);
                d = d_out;
                cur = Bounds {
                    x: out.x,
                    ub: out.ub,
                    lb: out.lb,
                };
            }
        }
    }
    Ok((cur, SolveStatus::Converged, d))
}

/// Iteration bound for one phase entered with gap `delta` and estimate `d`:
/// `R √(c L_f̂ / (θβΔ)) + (√2 R ‖A‖ / (θβΔ)) √(c D / σ_v) + 1`.
pub fn fusl_phase_bound(
    delta: f64,
    d: f64,
    radius: f64,
    l_fhat: f64,
    op_norm: f64,
    sigma_v: f64,
    params: &LevelParams,
) -> f64 {
    let c = params.scheme.c_of_rho(1.0);
    let tb = params.theta * params.beta * delta;
    radius * (c * l_fhat / tb).sqrt() + (2f64.sqrt() * radius * op_norm / tb) * (c * d / sigma_v).sqrt() + 1.0
}

/// Upper bound on the number of dual-size doublings: `max{⌈log₂(D_{v,Y}/D₁)⌉, 0}`.
pub fn doubling_bound(d_vy: f64, d1: f64) -> u64 {
    (d_vy / d1).log2().ceil().max(0.0) as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `F(x) = |x₁| + |x₂|` via `A = I`, `Y = [−1,1]²`, `v = ½‖y‖²`.
    struct L1;

    impl StructuredObjective for L1 {
        fn dim(&self) -> usize {
            2
        }
        fn dual_dim(&self) -> usize {
            2
        }
        fn smooth_part(&self, x: &[f64]) -> Evaluation {
            let d = [x[0] - 0.3, x[1] + 0.2];
            Evaluation {
                value: 0.5 * (d[0] * d[0] + d[1] * d[1]),
                subgradient: d.to_vec(),
            }
        }
        fn apply(&self, x: &[f64]) -> Vec<f64> {
            x.to_vec()
        }
        fn apply_adjoint(&self, y: &[f64]) -> Vec<f64> {
            y.to_vec()
        }
        fn dual_prox(&self, w: &[f64], eta: f64) -> Result<(Vec<f64>, f64)> {
            let y: Vec<f64> = w
                .iter()
                .map(|&wi| if eta == 0.0 { wi.signum() * (wi != 0.0) as u8 as f64 } else { (wi / eta).clamp(-1.0, 1.0) })
                .collect();
            let v = w.iter().zip(&y).map(|(a, b)| a * b - 0.5 * eta * b * b).sum();
            Ok((y, v))
        }
        fn exact_nonsmooth(&self, w: &[f64]) -> Option<f64> {
            Some(w.iter().map(|v| v.abs()).sum())
        }
        fn dual_diameter(&self) -> Option<f64> {
            Some(1.0)
        }
    }

    #[test]
    fn sandwich_holds_for_l1() {
        for eta in [1.0, 0.1, 0.01] {
            for x in [[0.0, 0.0], [0.05, -2.0], [1.0, 1.0]] {
                assert_eq!(sandwich_check(&L1, eta, &x, 1.0).unwrap(), Some(true));
            }
        }
    }

    #[test]
    fn fusl_solves_soft_threshold() {
        // minimizer of ½‖x − a‖² + ‖x‖₁ with a = (0.3, −0.2) is 0
        let ball = Ball::new(vec![0.5, 0.5], 2.0).unwrap();
        let r = fusl_solve(&L1, &ball, &[0.5, 0.5], 1.0, 1e-8, LowerBoundInit::Model, &LevelParams::default(), None)
            .unwrap();
        assert_eq!(r.status, SolveStatus::Converged);
        let f_star = 0.5 * (0.09 + 0.04);
        assert!(r.ub - f_star <= 1e-8);
        assert!(r.lb <= f_star + 1e-12);
    }

    #[test]
    fn doubling_bound_values() {
        assert_eq!(doubling_bound(32.0, 32.0), 0);
        assert_eq!(doubling_bound(32.0, 64.0), 0);
        assert_eq!(doubling_bound(32.0, 0.32), 7);
    }

    #[test]
    fn phase_bound_without_operator_reduces_to_smooth_bound() {
        let p = LevelParams::default();
        let v = fusl_phase_bound(1.0, 1.0, 1.0, 2.0, 0.0, 1.0, &p);
        assert!((v - (4.0 * 2.0 / 0.25f64).sqrt() - 1.0).abs() < 1e-12);
    }
}
