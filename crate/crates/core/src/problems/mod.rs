//! Benchmark instances and their oracles.

mod io;
mod least_squares;
mod phantom;
mod quadratic;
mod tv;

pub use io::{
    read_lvlf, read_matrix_market, read_pgm, write_lvlf, write_matrix_market, write_pgm, LvlfArray, LVLF_MAGIC,
    LVLF_VERSION,
};
pub use least_squares::{gen_least_squares, ls_oracle, Distribution, LeastSquaresInstance, LeastSquaresOracle};
pub use phantom::phantom;
pub use quadratic::QuadraticInstance;
pub use tv::{gradient, gradient_adjoint, tv_norm, tv_structured_objective, ImageDims, TvInstance, TvObjective};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, StandardNormal};

/// Counter-based stream for instance generation.
pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Uniform sample from the unit ball: a normalized Gaussian direction scaled
/// by the largest of `n` uniforms (distributed as `U^{1/n}`).
pub(crate) fn uniform_in_ball(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    use rand::Rng;
    let mut v: Vec<f64> = (0..n).map(|_| gaussian(rng)).collect();
    let len = crate::linalg::norm(&v);
    let radius = (0..n).map(|_| rng.random::<f64>()).fold(0.0, f64::max);
    let s = if len > 0.0 { radius / len } else { 0.0 };
    v.iter_mut().for_each(|x| *x *= s);
    v
}
