use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Result, SolverError};
use crate::fusl::StructuredObjective;
use crate::linalg::{dot, fill_indexed, sub, DenseMatrix, Exec};
use crate::oracle::Evaluation;

use super::{gaussian, rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageDims {
    pub height: usize,
    pub width: usize,
}

impl ImageDims {
    pub fn new(height: usize, width: usize) -> Self {
        Self { height, width }
    }

    pub fn square(side: usize) -> Self {
        Self::new(side, side)
    }

    pub fn pixels(&self) -> usize {
        self.height * self.width
    }
}

/// Forward differences, zero on the last column (horizontal) and last row
/// (vertical). Output is interleaved: `[dx₀, dy₀, dx₁, dy₁, …]`.
pub fn gradient(u: &[f64], dims: ImageDims) -> Vec<f64> {
    let ImageDims { height: h, width: w } = dims;
    assert_eq!(u.len(), h * w, "image length does not match dimensions");
    let mut out = vec![0.0; 2 * h * w];
    for r in 0..h {
        for c in 0..w {
            let i = r * w + c;
            if c + 1 < w {
                out[2 * i] = u[i + 1] - u[i];
            }
            if r + 1 < h {
                out[2 * i + 1] = u[i + w] - u[i];
            }
        }
    }
    out
}

/// `Dᵀp`, written as a per-pixel gather.
pub fn gradient_adjoint(p: &[f64], dims: ImageDims) -> Vec<f64> {
    adjoint_with(p, dims, Exec::Sequential)
}

fn adjoint_with(p: &[f64], dims: ImageDims, exec: Exec) -> Vec<f64> {
    let ImageDims { height: h, width: w } = dims;
    assert_eq!(p.len(), 2 * h * w, "dual length does not match dimensions");
    let mut out = vec![0.0; h * w];
    fill_indexed(exec, &mut out, |i| {
        let (r, c) = (i / w, i % w);
        let mut v = 0.0;
        if c + 1 < w {
            v -= p[2 * i];
        }
        if c > 0 {
            v += p[2 * (i - 1)];
        }
        if r + 1 < h {
            v -= p[2 * i + 1];
        }
        if r > 0 {
            v += p[2 * (i - w) + 1];
        }
        v
    });
    out
}

/// Isotropic total variation `Σ ‖D_i u‖`.
pub fn tv_norm(u: &[f64], dims: ImageDims) -> f64 {
    gradient(u, dims)
        .chunks_exact(2)
        .map(|d| d[0].hypot(d[1]))
        .sum()
}

/// `min_u ½‖Au − b‖² + (μ/2)‖u‖² + λ ‖u‖_TV`.
#[derive(Debug, Clone, PartialEq)]
pub struct TvInstance {
    pub a: DenseMatrix,
    pub b: Vec<f64>,
    pub lambda_tv: f64,
    pub dims: ImageDims,
    pub sigma_noise: f64,
    pub u_true: Vec<f64>,
    /// Optional strongly convex term; 0 for the plain problem.
    pub mu: f64,
}

impl TvInstance {
    /// Gaussian sensing matrix scaled by `1/√m` and noisy measurements of
    /// `u_true`.
    pub fn generate(
        u_true: Vec<f64>,
        dims: ImageDims,
        measurements: usize,
        lambda_tv: f64,
        sigma_noise: f64,
        seed: u64,
    ) -> Result<Self> {
        check_dim(dims.pixels(), u_true.len())?;
        if measurements == 0 || !(lambda_tv >= 0.0) || !(sigma_noise >= 0.0) {
            return Err(SolverError::InvalidParameter {
                name: "tv instance",
                reason: "need m ≥ 1, λ ≥ 0 and σ ≥ 0".into(),
            });
        }
        let n = dims.pixels();
        let mut r = rng(seed);
        let scale = 1.0 / (measurements as f64).sqrt();
        let data: Vec<f64> = (0..measurements * n).map(|_| scale * gaussian(&mut r)).collect();
        let a = DenseMatrix::from_row_major(measurements, n, data);
        let mut b = a.matvec(&u_true, Exec::Sequential);
        for v in &mut b {
            *v += sigma_noise * gaussian(&mut r);
        }
        Ok(Self {
            a,
            b,
            lambda_tv,
            dims,
            sigma_noise,
            u_true,
            mu: 0.0,
        })
    }

    pub fn with_strong_convexity(mut self, mu: f64) -> Self {
        self.mu = mu;
        self
    }

    /// `‖A‖² + μ` via power iteration.
    pub fn smooth_lipschitz(&self, exec: Exec) -> f64 {
        let s = self.a.spectral_norm(500, 1e-10, exec);
        s * s + self.mu
    }

    /// `λ ‖D‖` via power iteration on `DᵀD`.
    pub fn operator_norm(&self) -> f64 {
        let dims = self.dims;
        let s2 = crate::linalg::power_iteration(
            dims.pixels(),
            |x| gradient_adjoint(&gradient(x, dims), dims),
            500,
            1e-10,
        );
        self.lambda_tv * s2.sqrt()
    }

    pub fn relative_error(&self, u: &[f64]) -> f64 {
        crate::linalg::dist(u, &self.u_true) / crate::linalg::norm(&self.u_true)
    }
}

/// The TV instance viewed as `f̂ + F` with `F(u) = max_{‖y_i‖≤1} <λDu, y>`.
#[derive(Debug, Clone, Copy)]
pub struct TvObjective<'a> {
    pub inst: &'a TvInstance,
    pub exec: Exec,
}

pub fn tv_structured_objective(inst: &TvInstance, exec: Exec) -> TvObjective<'_> {
    TvObjective { inst, exec }
}

impl StructuredObjective for TvObjective<'_> {
    fn dim(&self) -> usize {
        self.inst.dims.pixels()
    }

    fn dual_dim(&self) -> usize {
        2 * self.inst.dims.pixels()
    }

    fn smooth_part(&self, u: &[f64]) -> Evaluation {
        let inst = self.inst;
        let r = sub(&inst.a.matvec(u, self.exec), &inst.b);
        let mut g = inst.a.matvec_t(&r, self.exec);
        let mut value = 0.5 * dot(&r, &r);
        if inst.mu != 0.0 {
            value += 0.5 * inst.mu * dot(u, u);
            g.iter_mut().zip(u).for_each(|(gi, ui)| *gi += inst.mu * ui);
        }
        Evaluation {
            value,
            subgradient: g,
        }
    }

    fn apply(&self, u: &[f64]) -> Vec<f64> {
        let mut w = gradient(u, self.inst.dims);
        w.iter_mut().for_each(|v| *v *= self.inst.lambda_tv);
        w
    }

    fn apply_adjoint(&self, y: &[f64]) -> Vec<f64> {
        let mut g = adjoint_with(y, self.inst.dims, self.exec);
        g.iter_mut().for_each(|v| *v *= self.inst.lambda_tv);
        g
    }

    /// Per block: `y_i = w_i / max(η, ‖w_i‖)`; value `‖w_i‖²/(2η)` inside the
    /// disk, `‖w_i‖ − η/2` outside.
    fn dual_prox(&self, w: &[f64], eta: f64) -> Result<(Vec<f64>, f64)> {
        if !(eta >= 0.0) {
            return Err(SolverError::DualProx(format!("negative smoothing parameter {eta}")));
        }
        let mut y = vec![0.0; w.len()];
        let mut value = 0.0;
        for (wi, yi) in w.chunks_exact(2).zip(y.chunks_exact_mut(2)) {
            let len = wi[0].hypot(wi[1]);
            let denom = eta.max(len);
            if denom > 0.0 {
                yi[0] = wi[0] / denom;
                yi[1] = wi[1] / denom;
            }
            value += if len <= eta { len * len / (2.0 * eta) } else { len - 0.5 * eta };
        }
        Ok((y, value))
    }

    fn exact_nonsmooth(&self, w: &[f64]) -> Option<f64> {
        Some(w.chunks_exact(2).map(|d| d[0].hypot(d[1])).sum())
    }

    /// `max_{y∈Y} ½‖y‖² = N/2`.
    fn dual_diameter(&self) -> Option<f64> {
        Some(self.inst.dims.pixels() as f64 / 2.0)
    }
}
