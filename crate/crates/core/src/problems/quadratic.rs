use rand::Rng;

use crate::error::{check_positive, Result, SolverError};
use crate::linalg::{dot, norm, sub, DenseMatrix, Exec};
use crate::oracle::{Evaluation, FirstOrderOracle, HolderClass};

use super::{gaussian, rng};

/// `f(x) = ½ (x − x*)ᵀ H (x − x*) + f*` with spectrum of `H` in `[μ, L]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticInstance {
    pub h: DenseMatrix,
    pub x_star: Vec<f64>,
    pub f_star: f64,
    pub mu: f64,
    pub lipschitz: f64,
    pub exec: Exec,
}

impl QuadraticInstance {
    /// Random rotation of a diagonal whose extreme entries are exactly `mu`
    /// and `lipschitz` (the rest uniform in between).
    pub fn generate(x_star: Vec<f64>, f_star: f64, mu: f64, lipschitz: f64, seed: u64) -> Result<Self> {
        let n = x_star.len();
        check_positive("mu", mu)?;
        if !(lipschitz >= mu) || n == 0 {
            return Err(SolverError::InvalidParameter {
                name: "lipschitz",
                reason: format!("need L ≥ μ and n ≥ 1, got L = {lipschitz}, μ = {mu}, n = {n}"),
            });
        }
        let mut r = rng(seed);
        let diag: Vec<f64> = (0..n)
            .map(|i| match i {
                0 => lipschitz,
                1 => mu,
                _ => mu + (lipschitz - mu) * r.random::<f64>(),
            })
            .collect();
        let diag = if n == 1 { vec![lipschitz] } else { diag };
        let mu = if n == 1 { lipschitz } else { mu };

        // H = Q diag Qᵀ with Q a product of Householder reflections.
        let mut h = vec![0.0; n * n];
        for (i, d) in diag.iter().enumerate() {
            h[i * n + i] = *d;
        }
        for _ in 0..n.min(4) {
            let mut v: Vec<f64> = (0..n).map(|_| gaussian(&mut r)).collect();
            let len = norm(&v);
            v.iter_mut().for_each(|x| *x /= len);
            h = reflect_both_sides(&h, &v, n);
        }
        // exact symmetry
        for i in 0..n {
            for j in 0..i {
                let s = 0.5 * (h[i * n + j] + h[j * n + i]);
                h[i * n + j] = s;
                h[j * n + i] = s;
            }
        }
        Ok(Self {
            h: DenseMatrix::from_row_major(n, n, h),
            x_star,
            f_star,
            mu,
            lipschitz,
            exec: Exec::Sequential,
        })
    }

    /// `f(x) = (L/2) ‖x − x*‖² + f*`.
    pub fn isotropic(x_star: Vec<f64>, f_star: f64, lipschitz: f64) -> Self {
        let n = x_star.len();
        let mut h = DenseMatrix::identity(n).data().to_vec();
        h.iter_mut().for_each(|v| *v *= lipschitz);
        Self {
            h: DenseMatrix::from_row_major(n, n, h),
            x_star,
            f_star,
            mu: lipschitz,
            lipschitz,
            exec: Exec::Sequential,
        }
    }

    pub fn holder(&self) -> HolderClass {
        HolderClass {
            m: self.lipschitz,
            rho: 1.0,
        }
    }
}

/// `(I − 2vvᵀ) H (I − 2vvᵀ)` for unit `v`.
fn reflect_both_sides(h: &[f64], v: &[f64], n: usize) -> Vec<f64> {
    let hv: Vec<f64> = (0..n).map(|i| dot(&h[i * n..(i + 1) * n], v)).collect();
    let vhv = dot(v, &hv);
    let mut out = h.to_vec();
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] += -2.0 * v[i] * hv[j] - 2.0 * hv[i] * v[j] + 4.0 * vhv * v[i] * v[j];
        }
    }
    out
}

impl FirstOrderOracle for QuadraticInstance {
    fn dim(&self) -> usize {
        self.x_star.len()
    }

    fn eval(&self, x: &[f64]) -> Evaluation {
        let d = sub(x, &self.x_star);
        let g = self.h.matvec(&d, self.exec);
        Evaluation {
            value: 0.5 * dot(&d, &g) + self.f_star,
            subgradient: g,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectrum_is_preserved() {
        let q = QuadraticInstance::generate(vec![0.0; 6], 0.0, 0.5, 8.0, 11).unwrap();
        let top = q.h.spectral_norm(2000, 1e-14, Exec::Sequential);
        assert!((top - 8.0).abs() < 1e-6);
        let ev = q.eval(&q.x_star);
        assert_eq!(ev.value, 0.0);
    }

    #[test]
    fn strong_convexity_lower_bound_holds() {
        let q = QuadraticInstance::generate(vec![1.0, -2.0, 0.5], 3.0, 1.0, 10.0, 5).unwrap();
        for x in [[0.0, 0.0, 0.0], [4.0, 1.0, -1.0]] {
            let gap = q.value(&x) - q.f_star;
            let d2: f64 = x.iter().zip(&q.x_star).map(|(a, b)| (a - b) * (a - b)).sum();
            assert!(gap >= 0.5 * q.mu * d2 * (1.0 - 1e-12));
            assert!(gap <= 0.5 * q.lipschitz * d2 * (1.0 + 1e-12));
        }
    }
}
