use levelforge::baselines::{nest_solve, NestConfig};
use levelforge::fusl::{doubling_bound, fusl_solve, StructuredObjective};
use levelforge::oracle::ShiftedSquaredNorm;
use levelforge::problems::{
    gen_least_squares, ls_oracle, phantom, tv_structured_objective, Distribution, ImageDims, QuadraticInstance,
    TvInstance,
};
use levelforge::strongly_convex::{fapl_sc_solve, sc_phase_count_bound};
use levelforge::unconstrained::{solve_unconstrained, FaplBallSolver, UnconstrainedConfig};
use levelforge::{
    fapl_solve, Ball, Exec, FirstOrderOracle, IterationEvent, LevelParams, LowerBoundInit, ProjectionConfig,
    SolveStatus, SolverError, SolverObserver, Termination,
};
use proptest::prelude::*;

fn quad(n: usize, seed: u64, scale: f64) -> QuadraticInstance {
    let x_star: Vec<f64> = (0..n).map(|i| scale * ((i as f64 + 1.0) * 0.7 + seed as f64).sin() / (n as f64).sqrt()).collect();
    QuadraticInstance::generate(x_star, 0.25, 0.5, 4.0, seed).unwrap()
}

fn unit_ball(n: usize) -> Ball {
    Ball::new(vec![0.0; n], 1.0).unwrap()
}

fn exec_params(exec: Exec) -> LevelParams {
    LevelParams {
        projection: ProjectionConfig {
            exec,
            ..ProjectionConfig::default()
        },
        ..LevelParams::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn every_significant_phase_contracts_the_gap(
        beta in 0.2..0.8f64,
        theta in 0.2..0.8f64,
        seed in 0u64..50,
        known in any::<bool>(),
    ) {
        let q = quad(6, seed, 0.6);
        let params = LevelParams { beta, theta, ..LevelParams::default() };
        let lb = if known { LowerBoundInit::Known(0.0) } else { LowerBoundInit::Model };
        let rep = fapl_solve(&q, &unit_ball(6), &[0.0; 6], 1e-7, lb, &params, None).unwrap();
        prop_assert_eq!(rep.status, SolveStatus::Converged);
        let factor = params.contraction();
        for ph in &rep.trace.phases {
            prop_assert!(ph.gap_out() <= factor * ph.gap_in() * (1.0 + 1e-9) + 1e-15);
        }
        prop_assert!(rep.lb <= 0.25 + 1e-9 && rep.ub >= 0.25 - 1e-12);
        prop_assert!(rep.gap() <= 1e-7);
    }
}

struct Containment {
    x_star: Vec<f64>,
    f_star: f64,
    checked: usize,
    worst: f64,
}

impl SolverObserver for Containment {
    fn on_iteration(&mut self, e: &IterationEvent<'_>) {
        if e.level >= self.f_star {
            self.checked += 1;
            self.worst = self.worst.max(e.localizer.max_violation(&self.x_star));
            assert!(e.x_prox.is_some(), "localizer empty although level ≥ f*");
        }
    }
}

#[test]
fn localizer_keeps_the_minimizer_while_level_is_above_optimum() {
    let q = quad(5, 3, 0.8);
    let mut obs = Containment {
        x_star: q.x_star.clone(),
        f_star: q.f_star,
        checked: 0,
        worst: 0.0,
    };
    let lb = LowerBoundInit::Known(q.f_star);
    let rep = fapl_solve(&q, &unit_ball(5), &[0.0; 5], 1e-8, lb, &LevelParams::default(), Some(&mut obs)).unwrap();
    assert_eq!(rep.status, SolveStatus::Converged);
    assert_eq!(obs.checked as u64, rep.trace.total_iterations());
    assert!(rep.trace.phases.iter().all(|p| p.termination == Termination::GapClosed));
    assert!(obs.worst <= 1e-9, "worst violation {}", obs.worst);
}

#[test]
fn level_proven_phases_certify_lower_bounds() {
    let inst = gen_least_squares(20, 40, Distribution::Gaussian, 5).unwrap();
    let o = ls_oracle(&inst, Exec::Sequential);
    let rep = fapl_solve(&o, &unit_ball(40), &[0.0; 40], 1e-6, LowerBoundInit::Model, &LevelParams::default(), None)
        .unwrap();
    assert!(rep.trace.phases.iter().any(|p| p.termination == Termination::LevelProven));
    for row in &rep.trace.rows {
        assert!(row.lb <= 1e-12, "lb {} above f* = 0", row.lb);
    }
    assert!(o.value(&rep.x) <= 1e-6);
}

#[test]
fn trace_bounds_are_monotone() {
    let inst = gen_least_squares(15, 30, Distribution::Uniform01, 2).unwrap();
    let o = ls_oracle(&inst, Exec::Sequential);
    let rep = fapl_solve(&o, &unit_ball(30), &[0.0; 30], 1e-6, LowerBoundInit::Known(0.0), &LevelParams::default(), None)
        .unwrap();
    for w in rep.trace.rows.windows(2) {
        assert!(w[1].lb >= w[0].lb && w[1].ub <= w[0].ub);
        assert!(w[1].oracle_calls >= w[0].oracle_calls);
    }
    assert_eq!(rep.trace.rows.last().unwrap().oracle_calls, rep.counts.total());
}

#[test]
fn sequential_and_parallel_traces_coincide() {
    let inst = gen_least_squares(40, 80, Distribution::Gaussian, 8).unwrap();
    let run = |exec| {
        let o = ls_oracle(&inst, exec);
        fapl_solve(&o, &unit_ball(80), &[0.0; 80], 1e-5, LowerBoundInit::Model, &exec_params(exec), None).unwrap()
    };
    let seq = run(Exec::Sequential);
    let par = run(Exec::Parallel);
    assert_eq!(seq.trace.to_csv_string(), par.trace.to_csv_string());
    assert_eq!(seq.x, par.x);
}

#[test]
fn iteration_budget_is_reported() {
    let inst = gen_least_squares(20, 40, Distribution::Uniform01, 1).unwrap();
    let o = ls_oracle(&inst, Exec::Sequential);
    let params = LevelParams {
        max_total_iter: Some(7),
        ..LevelParams::default()
    };
    let rep = fapl_solve(&o, &unit_ball(40), &[0.0; 40], 1e-9, LowerBoundInit::Model, &params, None).unwrap();
    assert_eq!(rep.status, SolveStatus::BudgetExhausted);
    assert!(rep.trace.total_iterations() <= 7);
    assert!(rep.lb <= rep.ub);
}

#[test]
fn invalid_inputs_are_rejected() {
    let q = quad(3, 0, 0.5);
    let ball = unit_ball(3);
    let bad_beta = LevelParams {
        beta: 1.0,
        ..LevelParams::default()
    };
    let e = fapl_solve(&q, &ball, &[0.0; 3], 1e-3, LowerBoundInit::Model, &bad_beta, None).unwrap_err();
    assert!(matches!(e, SolverError::InvalidParameter { .. }));
    let e = fapl_solve(&q, &ball, &[0.0; 3], -1.0, LowerBoundInit::Model, &LevelParams::default(), None).unwrap_err();
    assert!(matches!(e, SolverError::InvalidParameter { .. }));
    let e = fapl_solve(&q, &ball, &[0.0; 2], 1e-3, LowerBoundInit::Model, &LevelParams::default(), None).unwrap_err();
    assert!(matches!(e, SolverError::DimensionMismatch { .. }));
}

#[test]
fn unconstrained_search_expands_towards_a_distant_minimizer() {
    let f = ShiftedSquaredNorm {
        target: vec![6.0, -3.0, 0.0],
        weight: 1.0,
    };
    let solver = FaplBallSolver {
        oracle: &f,
        params: LevelParams::default(),
        lb_init: LowerBoundInit::Model,
    };
    let cfg = UnconstrainedConfig {
        eps_stop: 1e-6,
        ..UnconstrainedConfig::default()
    };
    let rep = solve_unconstrained(&solver, &[0.0; 3], &cfg).unwrap();
    assert_eq!(rep.status, SolveStatus::Converged);
    assert!(rep.state.expansions >= 2);
    assert!(rep.state.radius >= 45f64.sqrt() / 2.0);
    assert!(rep.value <= 1e-5, "value {}", rep.value);
    for w in rep.committed_values.windows(2) {
        assert!(w[1] <= w[0]);
    }
}

#[test]
fn strongly_convex_variant_meets_its_phase_bound() {
    let q = quad(8, 4, 3.0);
    let lb1 = q.f_star - 2.0;
    let p0 = vec![0.0; 8];
    let eps = 1e-8;
    let params = LevelParams::default();
    let rep = fapl_sc_solve(&q, &p0, lb1, q.mu, eps, &params, None).unwrap();
    assert_eq!(rep.status, SolveStatus::Converged);
    assert!(rep.gap() <= eps);
    assert!(q.value(&rep.x) - q.f_star <= eps);
    let gap1 = q.value(&p0) - lb1;
    let significant = rep.trace.phases.iter().filter(|p| p.termination.is_significant()).count() as u64;
    assert!(significant <= sc_phase_count_bound(gap1, eps, &params));
}

#[test]
fn strongly_convex_variant_requires_finite_bound() {
    let q = quad(4, 1, 1.0);
    let e = fapl_sc_solve(&q, &[0.0; 4], f64::NEG_INFINITY, q.mu, 1e-6, &LevelParams::default(), None).unwrap_err();
    assert!(matches!(e, SolverError::InvalidParameter { .. }));
}

fn tv8() -> TvInstance {
    let dims = ImageDims::square(8);
    TvInstance::generate(phantom(dims), dims, 32, 0.05, 0.01, 3).unwrap()
}

#[test]
fn smoothed_method_brackets_the_tv_optimum() {
    let inst = tv8();
    let obj = tv_structured_objective(&inst, Exec::Sequential);
    let ball = Ball::new(vec![0.0; 64], 8.0).unwrap();
    let d = obj.dual_diameter().unwrap();
    let rep = fusl_solve(&obj, &ball, &[0.0; 64], d, 1e-2, LowerBoundInit::Model, &LevelParams::default(), None)
        .unwrap();
    assert_eq!(rep.status, SolveStatus::Converged);
    assert!(rep.gap() <= 1e-2);
    assert!(rep.trace.phases.iter().all(|p| p.termination != Termination::SmoothingDoubled));
}

#[test]
fn dual_size_doublings_stay_within_bound() {
    let inst = tv8();
    let obj = tv_structured_objective(&inst, Exec::Sequential);
    let ball = Ball::new(vec![0.0; 64], 8.0).unwrap();
    let d = obj.dual_diameter().unwrap();
    let d1 = d / 64.0;
    let rep = fusl_solve(&obj, &ball, &[0.0; 64], d1, 1e-2, LowerBoundInit::Model, &LevelParams::default(), None)
        .unwrap();
    assert_eq!(rep.status, SolveStatus::Converged);
    let doublings = rep
        .trace
        .phases
        .iter()
        .filter(|p| p.termination == Termination::SmoothingDoubled)
        .count() as u64;
    assert!(doublings <= doubling_bound(d, d1), "{doublings} doublings");
}

#[test]
fn accelerated_gradient_reaches_target() {
    let inst = gen_least_squares(20, 40, Distribution::Gaussian, 6).unwrap();
    let o = ls_oracle(&inst, Exec::Sequential);
    let cfg = NestConfig {
        lipschitz: inst.lipschitz(Exec::Sequential),
        max_iter: 200_000,
        target: Some(1e-4),
        record_time: false,
    };
    let rep = nest_solve(&o, &unit_ball(40), &[0.0; 40], &cfg).unwrap();
    assert_eq!(rep.status, SolveStatus::Converged);
    assert!(o.value(&rep.x) <= 1e-4);
    assert!(rep.x.iter().map(|v| v * v).sum::<f64>() <= 1.0 + 1e-12);
}
