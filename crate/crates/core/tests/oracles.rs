use levelforge::fusl::{smoothed_eval, true_value, StructuredObjective};
use levelforge::linalg::{dot, norm, sub};
use levelforge::problems::{
    gen_least_squares, gradient, gradient_adjoint, ls_oracle, phantom, read_lvlf, tv_norm, tv_structured_objective,
    write_lvlf, Distribution, ImageDims, LeastSquaresInstance, QuadraticInstance, TvInstance,
};
use levelforge::{Exec, FirstOrderOracle};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn central_difference(f: &dyn Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let mut a = x.to_vec();
            let mut b = x.to_vec();
            a[i] += h;
            b[i] -= h;
            (f(&a) - f(&b)) / (2.0 * h)
        })
        .collect()
}

fn rel(a: &[f64], b: &[f64]) -> f64 {
    norm(&sub(a, b)) / norm(b).max(1e-12)
}

fn random_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

#[test]
fn least_squares_gradient_matches_finite_differences() {
    let inst = gen_least_squares(15, 25, Distribution::Gaussian, 4).unwrap();
    let o = ls_oracle(&inst, Exec::Sequential);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10 {
        let x = random_point(&mut rng, 25);
        let fd = central_difference(&|z| o.value(z), &x, 1e-6);
        assert!(rel(&o.eval(&x).subgradient, &fd) < 1e-6);
    }
}

#[test]
fn least_squares_value_is_squared_residual() {
    let inst = gen_least_squares(6, 9, Distribution::Uniform01, 2).unwrap();
    let o = ls_oracle(&inst, Exec::Sequential);
    let x = vec![0.1; 9];
    let mut e = 0.0;
    for i in 0..6 {
        let r: f64 = (0..9).map(|j| inst.a.get(i, j) * x[j]).sum::<f64>() - inst.b[i];
        e += r * r;
    }
    assert!((o.value(&x) - e).abs() <= 1e-12 * (1.0 + e));
    assert!(o.value(&inst.x_true) <= 1e-24);
    assert!(norm(&inst.x_true) <= 1.0);
}

#[test]
fn lipschitz_constant_matches_svd() {
    let inst = gen_least_squares(12, 20, Distribution::Uniform01, 9).unwrap();
    let m = DMatrix::from_row_slice(12, 20, inst.a.data());
    let smax = m.singular_values().max();
    let l = inst.lipschitz(Exec::Sequential);
    assert!((l - 2.0 * smax * smax).abs() <= 1e-8 * l);
}

#[test]
fn uniform_entries_lie_in_unit_interval() {
    let inst = gen_least_squares(30, 40, Distribution::Uniform01, 0).unwrap();
    assert!(inst.a.data().iter().all(|v| (0.0..=1.0).contains(v)));
    let mean = inst.a.data().iter().sum::<f64>() / 1200.0;
    assert!((mean - 0.5).abs() < 0.05);
}

#[test]
fn generation_is_seeded() {
    let a = gen_least_squares(8, 8, Distribution::Gaussian, 11).unwrap();
    let b = gen_least_squares(8, 8, Distribution::Gaussian, 11).unwrap();
    let c = gen_least_squares(8, 8, Distribution::Gaussian, 12).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.a, c.a);
}

#[test]
fn lvlf_round_trip_preserves_instance() {
    let inst = gen_least_squares(5, 7, Distribution::Gaussian, 3).unwrap();
    let mut buf = Vec::new();
    write_lvlf(&mut buf, &inst.to_lvlf()).unwrap();
    let back = LeastSquaresInstance::from_lvlf(read_lvlf(&buf[..]).unwrap()).unwrap();
    assert_eq!(back, inst);
}

fn tv_instance(side: usize, seed: u64) -> TvInstance {
    let dims = ImageDims::square(side);
    TvInstance::generate(phantom(dims), dims, side * side / 2, 0.1, 0.01, seed).unwrap()
}

#[test]
fn smoothed_tv_gradient_matches_finite_differences() {
    let inst = tv_instance(6, 5);
    let obj = tv_structured_objective(&inst, Exec::Sequential);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for eta in [1.0, 0.1, 0.01] {
        for _ in 0..5 {
            let u = random_point(&mut rng, 36);
            let g = smoothed_eval(&obj, eta, &u).unwrap().grad;
            let fd = central_difference(&|z| smoothed_eval(&obj, eta, z).unwrap().f_eta, &u, 1e-6);
            assert!(rel(&g, &fd) < 1e-5, "eta {eta}: {}", rel(&g, &fd));
        }
    }
}

#[test]
fn tv_norm_by_explicit_differences() {
    let dims = ImageDims::new(3, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let u = random_point(&mut rng, 12);
    let at = |i: usize, j: usize| u[i * 4 + j];
    let mut want = 0.0;
    for i in 0..3 {
        for j in 0..4 {
            let dx = if j + 1 < 4 { at(i, j + 1) - at(i, j) } else { 0.0 };
            let dy = if i + 1 < 3 { at(i + 1, j) - at(i, j) } else { 0.0 };
            want += dx.hypot(dy);
        }
    }
    assert!((tv_norm(&u, dims) - want).abs() < 1e-12);
}

#[test]
fn exact_value_combines_data_fit_and_tv() {
    let inst = tv_instance(5, 1);
    let obj = tv_structured_objective(&inst, Exec::Sequential);
    let u = vec![0.3; 25];
    let r = sub(&inst.a.matvec(&u, Exec::Sequential), &inst.b);
    let want = 0.5 * dot(&r, &r) + inst.lambda_tv * tv_norm(&u, inst.dims);
    let got = true_value(&obj, &u, obj.dual_diameter().unwrap()).unwrap();
    assert!((got - want).abs() <= 1e-12 * (1.0 + want));
}

#[test]
fn smoothing_sandwich_on_random_points() {
    let inst = tv_instance(8, 2);
    let obj = tv_structured_objective(&inst, Exec::Sequential);
    let half_n = 32.0;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let u = random_point(&mut rng, 64);
        let f = true_value(&obj, &u, half_n).unwrap();
        for eta in [10.0, 1.0, 1e-3] {
            let fe = smoothed_eval(&obj, eta, &u).unwrap().f_eta;
            let tol = 1e-9 * (1.0 + f.abs());
            assert!(fe <= f + tol && f <= fe + eta * half_n + tol);
        }
    }
}

#[test]
fn phantom_is_deterministic_and_bounded() {
    let dims = ImageDims::square(16);
    let a = phantom(dims);
    assert_eq!(a, phantom(dims));
    assert_eq!(a.len(), 256);
    assert!(a.iter().all(|v| (0.0..=1.0).contains(v)));
    assert!(a.iter().any(|&v| v > 0.0));
}

#[test]
fn quadratic_spectrum_spans_mu_to_l() {
    let x_star = vec![0.1, -0.2, 0.3, 0.0, 0.05];
    let q = QuadraticInstance::generate(x_star.clone(), 1.5, 0.2, 7.0, 3).unwrap();
    let h = DMatrix::from_row_slice(5, 5, q.h.data());
    let eig = h.symmetric_eigenvalues();
    assert!((eig.min() - 0.2).abs() < 1e-10 && (eig.max() - 7.0).abs() < 1e-10);
    assert_eq!(q.value(&x_star), 1.5);
}

proptest! {
    #[test]
    fn gradient_adjoint_identity(h in 1usize..6, w in 1usize..6, seed in 0u64..1000) {
        let dims = ImageDims::new(h, w);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_point(&mut rng, h * w);
        let p = random_point(&mut rng, 2 * h * w);
        let lhs = dot(&gradient(&u, dims), &p);
        let rhs = dot(&u, &gradient_adjoint(&p, dims));
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn tv_norm_is_a_seminorm(seed in 0u64..1000, c in -3.0..3.0f64, s in -2.0..2.0f64) {
        let dims = ImageDims::new(4, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_point(&mut rng, 20);
        let v = random_point(&mut rng, 20);
        let shifted: Vec<f64> = u.iter().map(|x| x + c).collect();
        let scaled: Vec<f64> = u.iter().map(|x| s * x).collect();
        let sum: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + b).collect();
        prop_assert!((tv_norm(&shifted, dims) - tv_norm(&u, dims)).abs() < 1e-10);
        prop_assert!((tv_norm(&scaled, dims) - s.abs() * tv_norm(&u, dims)).abs() < 1e-10);
        prop_assert!(tv_norm(&sum, dims) <= tv_norm(&u, dims) + tv_norm(&v, dims) + 1e-10);
    }

    #[test]
    fn parallel_matvec_matches_sequential(rows in 1usize..40, cols in 1usize..40, seed in 0u64..100) {
        let inst = gen_least_squares(rows, cols, Distribution::Gaussian, seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_point(&mut rng, cols);
        let y = random_point(&mut rng, rows);
        prop_assert_eq!(inst.a.matvec(&x, Exec::Sequential), inst.a.matvec(&x, Exec::Parallel));
        prop_assert_eq!(inst.a.matvec_t(&y, Exec::Sequential), inst.a.matvec_t(&y, Exec::Parallel));
    }
}
