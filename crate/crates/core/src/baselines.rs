//! Accelerated projected gradient baseline.

use crate::context::RunContext;
use crate::error::{check_dim, check_positive, Result};
use crate::fapl::check_start;
use crate::linalg::lerp;
use crate::oracle::{Ball, FirstOrderOracle};
use crate::trace::{SolveReport, SolveStatus};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NestConfig {
    pub lipschitz: f64,
    pub max_iter: u64,
    /// Stop once `f(x_k) ≤ target`.
    pub target: Option<f64>,
    pub record_time: bool,
}

/// Accelerated projected gradient with step `1/L`.
///
/// Each iteration costs one gradient evaluation at the extrapolated point;
/// `f(x_k)` is evaluated for the trace only and counted under `value`. The
/// trace's `oracle_calls` column counts gradient evaluations. There is no
/// lower bound, so `lb` is `-∞`.
pub fn nest_solve<O: FirstOrderOracle + ?Sized>(
    oracle: &O,
    ball: &Ball,
    p0: &[f64],
    cfg: &NestConfig,
) -> Result<SolveReport> {
    check_positive("lipschitz", cfg.lipschitz)?;
    check_dim(ball.dim(), oracle.dim())?;
    check_start(ball, p0)?;
    let mut ctx = RunContext::new(cfg.record_time);
    let lb = f64::NEG_INFINITY;

    let mut x_prev = ball.project(p0);
    let mut best_x = x_prev.clone();
    let mut best = oracle.value(&x_prev);
    let mut value_calls = 1;
    ctx.record_init(lb, best, best);
    let mut y = x_prev.clone();
    let mut t = 1.0f64;
    let mut status = SolveStatus::BudgetExhausted;

    for _ in 0..cfg.max_iter {
        if cfg.target.is_some_and(|tg| best <= tg) {
            status = SolveStatus::Converged;
            break;
        }
        let ev = ctx.eval(oracle, &y);
        let step: Vec<f64> = y
            .iter()
            .zip(&ev.subgradient)
            .map(|(yi, gi)| yi - gi / cfg.lipschitz)
            .collect();
        let x = ball.project(&step);
        let fx = oracle.value(&x);
        value_calls += 1;
        if fx < best {
            best = fx;
            best_x.clone_from(&x);
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        y = lerp(&x, &x_prev, -(t - 1.0) / t_next);
        t = t_next;
        x_prev = x;
        ctx.record_iteration(1, lb, best, fx);
    }
    if cfg.target.is_some_and(|tg| best <= tg) {
        status = SolveStatus::Converged;
    }
    let (trace, mut counts) = ctx.into_parts();
    counts.value = value_calls;
    Ok(SolveReport {
        x: best_x,
        ub: best,
        lb,
        status,
        counts,
        trace,
    })
}
