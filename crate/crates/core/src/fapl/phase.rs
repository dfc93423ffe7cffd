//! The gap-reduction loop shared by the accelerated and smoothed variants.

use crate::context::{IterationEvent, RunContext, SmoothingSample};
use crate::error::{Result, SolverError};
use crate::linalg::{dist, lerp};
use crate::oracle::{Ball, Evaluation};
use crate::projection::{project, ProjectionConfig, ProjectionOutcome};
use crate::trace::Termination;

use super::localizer::{level_cut, update_localizer, Localizer};
use super::stepsize::StepsizeScheme;

/// Relative slack on the ball-exit test `‖x_k − x̄‖ > R`.
pub(crate) const BALL_EXIT_TOL: f64 = 1e-12;

/// Where a phase gets its cuts and upper-bound values from.
pub(crate) trait PhaseModel {
    /// Value and gradient used to build the level cut at `x_l`.
    fn lower(&mut self, ctx: &mut RunContext<'_>, x: &[f64]) -> Result<(Evaluation, Option<SmoothingSample>)>;

    /// Objective value at a trial upper point.
    fn upper(&mut self, ctx: &mut RunContext<'_>, x: &[f64]) -> Result<(f64, Option<SmoothingSample>)>;

    /// Smoothed value at `x`, or `None` when there is no smoothing test.
    fn smoothed(&mut self, ctx: &mut RunContext<'_>, x: &[f64]) -> Result<Option<f64>>;
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct PhaseSettings {
    pub beta: f64,
    pub theta: f64,
    pub scheme: StepsizeScheme,
    pub memory_depth: usize,
    pub projection: ProjectionConfig,
}

pub(crate) struct PhaseInput<'a> {
    pub index: usize,
    pub ball: &'a Ball,
    pub x_hat: &'a [f64],
    pub ub: f64,
    pub lb: f64,
    pub max_iter: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct PhaseOutput {
    pub x: Vec<f64>,
    pub ub: f64,
    pub lb: f64,
    pub termination: Termination,
    pub iterations: usize,
}

pub(crate) fn run_phase<M: PhaseModel>(
    model: &mut M,
    ctx: &mut RunContext<'_>,
    settings: &PhaseSettings,
    input: PhaseInput<'_>,
) -> Result<PhaseOutput> {
    let PhaseInput {
        index,
        ball,
        x_hat,
        ub: f0,
        lb,
        max_iter,
    } = input;
    let center = &ball.center[..];
    let level = settings.beta * lb + (1.0 - settings.beta) * f0;
    let target = level + settings.theta * (f0 - level);
    let smooth_target = level + 0.5 * settings.theta * (f0 - level);

    let mut steps = settings.scheme.schedule();
    let mut bundle = Localizer::new(settings.memory_depth);
    let mut x_prev = x_hat.to_vec();
    let mut x_up = x_hat.to_vec();
    let mut f_up = f0;
    let mut f_up_eta: Option<f64> = None;

    for k in 1..=max_iter {
        let alpha = steps.next().expect("schedule is infinite");
        let x_low = lerp(&x_up, &x_prev, alpha);
        let (ev, smoothing_lower) = model.lower(ctx, &x_low)?;
        let cut = level_cut(&ev, &x_low, level);
        let localizer = bundle.with_cut(&cut);
        let outcome = project(center, &localizer, &settings.projection)?;

        let x_k = match outcome {
            ProjectionOutcome::Feasible { x_star, .. }
                if dist(&x_star, center) <= ball.radius * (1.0 + BALL_EXIT_TOL) =>
            {
                x_star
            }
            other => {
                if ctx.has_observer() {
                    ctx.notify(&IterationEvent {
                        phase: index,
                        k,
                        center,
                        radius: ball.radius,
                        level,
                        x_lower: &x_low,
                        lower_cut: &cut,
                        localizer: &localizer,
                        x_prox: other.point(),
                        x_upper: &x_up,
                        f_upper: f_up,
                        smoothing_trial: None,
                        smoothing_lower,
                    });
                }
                ctx.record_iteration(index, level, f_up, f64::NAN);
                return Ok(PhaseOutput {
                    x: x_up,
                    ub: f_up,
                    lb: level,
                    termination: Termination::LevelProven,
                    iterations: k,
                });
            }
        };

        let x_trial = lerp(&x_up, &x_k, alpha);
        let (f_trial, smoothing_trial) = model.upper(ctx, &x_trial)?;
        if f_trial < f_up {
            x_up = x_trial;
            f_up = f_trial;
            f_up_eta = smoothing_trial.map(|s| s.f_eta);
        }
        if ctx.has_observer() {
            ctx.notify(&IterationEvent {
                phase: index,
                k,
                center,
                radius: ball.radius,
                level,
                x_lower: &x_low,
                lower_cut: &cut,
                localizer: &localizer,
                x_prox: Some(&x_k),
                x_upper: &x_up,
                f_upper: f_up,
                smoothing_trial,
                smoothing_lower,
            });
        }
        ctx.record_iteration(index, lb, f_up, f_trial);

        if f_up <= target {
            return Ok(PhaseOutput {
                x: x_up,
                ub: f_up,
                lb,
                termination: Termination::GapClosed,
                iterations: k,
            });
        }
        let f_eta = match f_up_eta {
            Some(v) => Some(v),
            None => {
                let v = model.smoothed(ctx, &x_up)?;
                f_up_eta = v;
                v
            }
        };
        if f_eta.is_some_and(|v| v <= smooth_target) {
            return Ok(PhaseOutput {
                x: x_up,
                ub: f_up,
                lb,
                termination: Termination::SmoothingDoubled,
                iterations: k,
            });
        }

        bundle = update_localizer(&bundle, cut, &x_k, center);
        x_prev = x_k;
    }

    Err(SolverError::IterationLimit {
        phase: index,
        iterations: max_iter,
        gap: f_up - lb,
        incumbent: x_up,
        incumbent_value: f_up,
        lower_bound: lb,
    })
}
