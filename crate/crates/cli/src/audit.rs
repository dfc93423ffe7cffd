//! Fast property suite behind `levelforge audit --suite invariants`.

use levelforge::fusl::{fusl_solve, smoothed_eval, StructuredObjective};
use levelforge::linalg::{dist, norm, norm_inf};
use levelforge::oracle::ShiftedSquaredNorm;
use levelforge::problems::{gen_least_squares, ls_oracle, phantom, tv_structured_objective, Distribution, ImageDims, QuadraticInstance, TvInstance};
use levelforge::strongly_convex::{fapl_sc_solve, sc_phase_count_bound, trust_radius};
use levelforge::unconstrained::{solve_unconstrained, FaplBallSolver, UnconstrainedConfig};
use levelforge::fapl::fapl_phase_bound;
use levelforge::{
    fapl_solve, project, Ball, Cut, Exec, FirstOrderOracle, IterationEvent, LevelParams, LowerBoundInit, Polyhedron,
    ProjectionConfig, ProjectionOutcome, SolveReport, SolverObserver, Termination,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::args::{AuditArgs, Suite};

type Check = Result<String, String>;

pub fn run_audit(args: &AuditArgs) -> u8 {
    let Suite::Invariants = args.suite;
    let seed = args.seed;
    let checks: [(&str, &dyn Fn(u64) -> Check); 9] = [
        ("projection", &projection),
        ("gap-contraction", &gap_contraction),
        ("phase-bound", &phase_bound),
        ("smoothing-sandwich", &sandwich),
        ("dual-size-doubling", &doubling),
        ("unconstrained-expansion", &unconstrained),
        ("strong-convexity", &strong_convexity),
        ("gradients", &gradients),
        ("determinism", &determinism),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        match check(seed) {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    println!("{} of {} checks passed", checks.len() - failed, checks.len());
    u8::from(failed > 0)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn solver_err(e: levelforge::SolverError) -> String {
    e.to_string()
}

fn uniform_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// Cyclic projections with Dykstra corrections.
fn dykstra(p: &[f64], cuts: &[Cut], sweeps: usize) -> Vec<f64> {
    let mut y = p.to_vec();
    let mut inc = vec![vec![0.0; p.len()]; cuts.len()];
    for _ in 0..sweeps {
        for (c, e) in cuts.iter().zip(inc.iter_mut()) {
            let z: Vec<f64> = y.iter().zip(e.iter()).map(|(a, b)| a + b).collect();
            let nn: f64 = c.normal.iter().map(|v| v * v).sum();
            let viol: f64 = c.normal.iter().zip(&z).map(|(a, b)| a * b).sum::<f64>() - c.offset;
            let t = if viol > 0.0 { viol / nn } else { 0.0 };
            let next: Vec<f64> = z.iter().zip(&c.normal).map(|(a, b)| a - t * b).collect();
            *e = z.iter().zip(&next).map(|(a, b)| a - b).collect();
            y = next;
        }
    }
    y
}

fn projection(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cfg = ProjectionConfig::default();
    let mut worst: f64 = 0.0;
    for _ in 0..60 {
        let n = rng.random_range(2..=6);
        let m = rng.random_range(1..=4);
        let interior = uniform_vec(&mut rng, n);
        let cuts: Vec<Cut> = (0..m)
            .map(|_| {
                let a = uniform_vec(&mut rng, n);
                let b = a.iter().zip(&interior).map(|(x, y)| x * y).sum::<f64>() + rng.random_range(0.0..0.5);
                Cut::new(a, b)
            })
            .collect();
        let p: Vec<f64> = uniform_vec(&mut rng, n).iter().map(|v| 3.0 * v).collect();
        let q = Polyhedron::from_cuts(cuts.clone());
        let got = project(&p, &q, &cfg).map_err(solver_err)?;
        let x = got.point().ok_or("feasible polyhedron reported infeasible")?;
        let reference = dykstra(&p, &cuts, 20_000);
        let d = norm_inf(&levelforge::linalg::sub(x, &reference));
        worst = worst.max(d);
    }
    ensure(worst <= 1e-6, || format!("max deviation from Dykstra {worst:e}"))?;
    for _ in 0..20 {
        let n = rng.random_range(2..=6);
        let a = uniform_vec(&mut rng, n);
        let neg: Vec<f64> = a.iter().map(|v| -v).collect();
        let q = Polyhedron::from_cuts(vec![Cut::new(a, -0.5), Cut::new(neg, -0.5)]);
        let got = project(&vec![0.0; n], &q, &cfg).map_err(solver_err)?;
        ensure(got == ProjectionOutcome::Infeasible, || "opposed half-spaces not flagged infeasible".into())?;
    }
    Ok(format!("60 feasible within {worst:.1e} of Dykstra, 20 infeasible flagged"))
}

fn contraction_violations(rep: &SolveReport, params: &LevelParams) -> usize {
    let q = params.contraction();
    rep.trace
        .phases
        .iter()
        .filter(|p| p.termination.is_significant())
        .filter(|p| {
            let scale = 1.0 + p.ub_in.abs().max(p.lb_in.abs());
            p.gap_out() > q * p.gap_in() + 1e-12 * scale
        })
        .count()
}

fn small_ls(seed: u64) -> levelforge::problems::LeastSquaresInstance {
    gen_least_squares(20, 40, Distribution::Uniform01, seed).expect("valid dimensions")
}

fn quad(seed: u64, n: usize, mu: f64, l: f64) -> QuadraticInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x51);
    let x_star: Vec<f64> = uniform_vec(&mut rng, n).iter().map(|v| 0.4 * v / (n as f64).sqrt()).collect();
    QuadraticInstance::generate(x_star, 0.0, mu, l, seed).expect("valid quadratic")
}

fn tv8(seed: u64) -> TvInstance {
    let dims = ImageDims::square(8);
    TvInstance::generate(phantom(dims), dims, 32, 0.05, 0.01, seed).expect("valid tv instance")
}

fn gap_contraction(seed: u64) -> Check {
    let params = LevelParams::default();
    let mut phases = 0;
    let mut bad = 0;
    let ls = small_ls(seed);
    let o = ls_oracle(&ls, Exec::default());
    let ball = Ball::new(vec![0.0; 40], 1.0).map_err(solver_err)?;
    for lb in [LowerBoundInit::Known(0.0), LowerBoundInit::Model] {
        let r = fapl_solve(&o, &ball, &[0.0; 40], 1e-8, lb, &params, None).map_err(solver_err)?;
        phases += r.trace.phases.len();
        bad += contraction_violations(&r, &params);
    }
    let qd = quad(seed, 8, 0.5, 10.0);
    let ball8 = Ball::new(vec![0.0; 8], 1.0).map_err(solver_err)?;
    let r = fapl_solve(&qd, &ball8, &[0.0; 8], 1e-10, LowerBoundInit::Model, &params, None).map_err(solver_err)?;
    phases += r.trace.phases.len();
    bad += contraction_violations(&r, &params);
    let r = fapl_sc_solve(&qd, &[0.0; 8], 0.0, qd.mu, 1e-10, &params, None).map_err(solver_err)?;
    phases += r.trace.phases.len();
    bad += contraction_violations(&r, &params);
    let tv = tv8(seed);
    let obj = tv_structured_objective(&tv, Exec::default());
    let ball64 = Ball::new(vec![0.0; 64], 8.0).map_err(solver_err)?;
    let r = fusl_solve(&obj, &ball64, &[0.0; 64], 1.0, 1e-2, LowerBoundInit::Known(0.0), &params, None)
        .map_err(solver_err)?;
    phases += r.trace.phases.len();
    bad += contraction_violations(&r, &params);
    ensure(bad == 0, || format!("{bad} of {phases} phases contracted less than q"))?;
    Ok(format!("{phases} phases, all within q = {}", params.contraction()))
}

fn phase_bound(seed: u64) -> Check {
    let params = LevelParams::default();
    let mut phases = 0;
    for (i, (mu, l)) in [(1.0, 1.0), (0.1, 4.0), (0.01, 20.0)].into_iter().enumerate() {
        let qd = quad(seed + i as u64, 6, mu, l);
        let ball = Ball::new(vec![0.0; 6], 1.0).map_err(solver_err)?;
        let r = fapl_solve(&qd, &ball, &[0.0; 6], 1e-9, LowerBoundInit::Model, &params, None).map_err(solver_err)?;
        for p in &r.trace.phases {
            phases += 1;
            let bound = fapl_phase_bound(qd.holder(), ball.radius, &params, p.gap_in());
            ensure(p.iterations as f64 <= bound, || {
                format!("phase {} used {} iterations, bound {bound:.2}", p.index, p.iterations)
            })?;
        }
    }
    Ok(format!("{phases} phases within N(Δ)"))
}

struct Sandwich {
    half_pixels: f64,
    samples: usize,
    worst: f64,
}

impl SolverObserver for Sandwich {
    fn on_iteration(&mut self, e: &IterationEvent<'_>) {
        for s in [e.smoothing_trial, e.smoothing_lower].into_iter().flatten() {
            self.samples += 1;
            let tol = 1e-9 * (1.0 + s.f_true.abs());
            let below = s.f_eta - s.f_true;
            let above = s.f_true - s.f_eta - s.eta * self.half_pixels;
            self.worst = self.worst.max((below.max(above) / tol).max(0.0));
        }
    }
}

fn sandwich(seed: u64) -> Check {
    let tv = tv8(seed);
    let obj = tv_structured_objective(&tv, Exec::default());
    let ball = Ball::new(vec![0.0; 64], 8.0).map_err(solver_err)?;
    let mut obs = Sandwich {
        half_pixels: 32.0,
        samples: 0,
        worst: 0.0,
    };
    let params = LevelParams::default();
    fusl_solve(&obj, &ball, &[0.0; 64], 1.0, 1e-2, LowerBoundInit::Known(0.0), &params, Some(&mut obs))
        .map_err(solver_err)?;
    ensure(obs.worst <= 1.0, || format!("sandwich broken by {:.2} tolerances", obs.worst))?;
    Ok(format!("{} samples inside the smoothing bracket", obs.samples))
}

fn doubling(seed: u64) -> Check {
    let tv = tv8(seed);
    let obj = tv_structured_objective(&tv, Exec::default());
    let d_vy = obj.dual_diameter().expect("tv has a known dual diameter");
    let ball = Ball::new(vec![0.0; 64], 8.0).map_err(solver_err)?;
    let params = LevelParams::default();
    let count = |d1: f64| -> Result<usize, String> {
        let r = fusl_solve(&obj, &ball, &[0.0; 64], d1, 1e-2, LowerBoundInit::Known(0.0), &params, None)
            .map_err(solver_err)?;
        Ok(r.trace
            .phases
            .iter()
            .filter(|p| p.termination == Termination::SmoothingDoubled)
            .count())
    };
    let exact = count(d_vy)?;
    let small = count(d_vy / 100.0)?;
    ensure(exact == 0, || format!("{exact} doublings with the true dual size"))?;
    ensure(small <= 7, || format!("{small} doublings from D/100"))?;
    Ok(format!("0 doublings at D, {small} from D/100"))
}

fn unconstrained(_seed: u64) -> Check {
    let f = ShiftedSquaredNorm {
        target: vec![8.0, 0.0, 0.0],
        weight: 1.0,
    };
    let s = FaplBallSolver {
        oracle: &f,
        params: LevelParams::default(),
        lb_init: LowerBoundInit::Model,
    };
    let cfg = UnconstrainedConfig {
        r0: 1.0,
        eps_stop: 1e-6,
        ..UnconstrainedConfig::default()
    };
    let r = solve_unconstrained(&s, &[0.0; 3], &cfg).map_err(solver_err)?;
    ensure(r.state.expansions <= 4, || format!("{} expansions", r.state.expansions))?;
    ensure(r.rounds.iter().all(|x| x.radius < 16.0), || "radius reached 16".into())?;
    ensure(r.committed_values.windows(2).all(|w| w[1] <= w[0]), || {
        "committed values increased".into()
    })?;
    ensure(r.value <= 1e-6, || format!("final value {:e}", r.value))?;
    Ok(format!("{} expansions, final value {:.1e}", r.state.expansions, r.value))
}

fn strong_convexity(seed: u64) -> Check {
    let params = LevelParams {
        record_iterates: true,
        ..LevelParams::default()
    };
    let mut phases = 0;
    for (i, mu) in [1.0, 0.1].into_iter().enumerate() {
        let qd = quad(seed + 10 + i as u64, 8, mu, 5.0);
        let p0 = vec![0.0; 8];
        let eps = 1e-9;
        let r = fapl_sc_solve(&qd, &p0, 0.0, mu, eps, &params, None).map_err(solver_err)?;
        for p in &r.trace.phases {
            let x_hat = p.x_hat_in.as_deref().ok_or("phase entry point not recorded")?;
            let d = dist(x_hat, &qd.x_star);
            let bound = trust_radius(p.gap_in(), mu);
            ensure(d <= bound * (1.0 + 1e-9) + 1e-12, || {
                format!("phase {}: ‖x̂ − x*‖ = {d:e} exceeds {bound:e}", p.index)
            })?;
        }
        let gap1 = qd.value(&p0);
        let cap = sc_phase_count_bound(gap1, eps, &params);
        ensure(r.trace.phases.len() as u64 <= cap, || {
            format!("{} phases, bound {cap}", r.trace.phases.len())
        })?;
        phases += r.trace.phases.len();
    }
    Ok(format!("{phases} phases inside the trust radius"))
}

fn fd_mismatch(f: &dyn Fn(&[f64]) -> f64, x: &[f64], grad: &[f64]) -> f64 {
    let h = 1e-6;
    let fd: Vec<f64> = (0..x.len())
        .map(|i| {
            let mut a = x.to_vec();
            let mut b = x.to_vec();
            a[i] += h;
            b[i] -= h;
            (f(&a) - f(&b)) / (2.0 * h)
        })
        .collect();
    norm(&levelforge::linalg::sub(&fd, grad)) / norm(grad).max(1e-12)
}

fn gradients(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xfd);
    let ls = small_ls(seed);
    let o = ls_oracle(&ls, Exec::Sequential);
    let tv = tv8(seed);
    let obj = tv_structured_objective(&tv, Exec::Sequential);
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let x = uniform_vec(&mut rng, 40);
        worst = worst.max(fd_mismatch(&|z| o.value(z), &x, &o.eval(&x).subgradient));
        let u = uniform_vec(&mut rng, 64);
        let eta = 0.5;
        let g = smoothed_eval(&obj, eta, &u).map_err(solver_err)?.grad;
        let f = |z: &[f64]| smoothed_eval(&obj, eta, z).expect("valid point").f_eta;
        worst = worst.max(fd_mismatch(&f, &u, &g));
    }
    ensure(worst <= 1e-5, || format!("relative mismatch {worst:e}"))?;
    Ok(format!("max relative mismatch {worst:.1e}"))
}

fn determinism(seed: u64) -> Check {
    let ls = small_ls(seed);
    let o = ls_oracle(&ls, Exec::default());
    let ball = Ball::new(vec![0.0; 40], 1.0).map_err(solver_err)?;
    let params = LevelParams::default();
    let run = || {
        fapl_solve(&o, &ball, &[0.0; 40], 1e-8, LowerBoundInit::Known(0.0), &params, None)
            .map(|r| r.trace.to_csv_string())
            .map_err(solver_err)
    };
    let (a, b) = (run()?, run()?);
    ensure(a == b, || "traces differ between identical runs".into())?;
    Ok(format!("{} identical trace bytes", a.len()))
}
