use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use levelforge::problems::{gen_least_squares, ls_oracle, Distribution};
use levelforge::{fapl_solve, project, Ball, Cut, Exec, LevelParams, LowerBoundInit, Polyhedron, ProjectionConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn matvec(c: &mut Criterion) {
    let inst = gen_least_squares(1000, 2000, Distribution::Uniform01, 1).unwrap();
    let x = vec![0.01; 2000];
    let y = vec![0.01; 1000];
    let mut g = c.benchmark_group("matvec_1000x2000");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::new("ax", name), |b| b.iter(|| inst.a.matvec(black_box(&x), exec)));
        g.bench_function(BenchmarkId::new("aty", name), |b| b.iter(|| inst.a.matvec_t(black_box(&y), exec)));
    }
    g.finish();
}

fn projection(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 500;
    let cuts: Vec<Cut> = (0..12)
        .map(|_| {
            let a: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            Cut::new(a, rng.random_range(-1.0..1.0))
        })
        .collect();
    let q = Polyhedron::from_cuts(cuts);
    let p: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut g = c.benchmark_group("projection_12_cuts");
    for (name, exec) in MODES {
        let cfg = ProjectionConfig {
            exec,
            max_cuts: 12,
            ..ProjectionConfig::default()
        };
        g.bench_function(name, |b| b.iter(|| project(black_box(&p), &q, &cfg).unwrap()));
    }
    g.finish();
}

fn fapl(c: &mut Criterion) {
    let inst = gen_least_squares(200, 400, Distribution::Uniform01, 1).unwrap();
    let ball = Ball::new(vec![0.0; 400], 1.0).unwrap();
    let mut g = c.benchmark_group("fapl_200x400_to_1e-4");
    g.sample_size(10);
    for (name, exec) in MODES {
        let o = ls_oracle(&inst, exec);
        let params = LevelParams {
            projection: ProjectionConfig {
                exec,
                ..ProjectionConfig::default()
            },
            ..LevelParams::default()
        };
        g.bench_function(name, |b| {
            b.iter(|| fapl_solve(&o, &ball, &[0.0; 400], 1e-4, LowerBoundInit::Model, &params, None).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, matvec, projection, fapl);
criterion_main!(benches);
