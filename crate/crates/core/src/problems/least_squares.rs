use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Result, SolverError};
use crate::linalg::{dot, sub, DenseMatrix, Exec};
use crate::oracle::{Evaluation, FirstOrderOracle};

use super::io::LvlfArray;
use super::{gaussian, rng, uniform_in_ball};

/// Entry distribution of the design matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Distribution {
    /// Uniform on `[0, 1]`.
    Uniform01,
    /// Standard normal.
    Gaussian,
}

/// `min_{‖x‖≤1} ‖Ax − b‖²` with `b = A x_true`, so `f* = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquaresInstance {
    pub a: DenseMatrix,
    pub b: Vec<f64>,
    pub x_true: Vec<f64>,
}

pub fn gen_least_squares(m: usize, n: usize, dist: Distribution, seed: u64) -> Result<LeastSquaresInstance> {
    if m == 0 || n == 0 {
        return Err(SolverError::InvalidParameter {
            name: "m, n",
            reason: format!("dimensions must be positive, got {m}×{n}"),
        });
    }
    let mut r = rng(seed);
    let data: Vec<f64> = match dist {
        Distribution::Uniform01 => (0..m * n).map(|_| r.random::<f64>()).collect(),
        Distribution::Gaussian => (0..m * n).map(|_| gaussian(&mut r)).collect(),
    };
    let a = DenseMatrix::from_row_major(m, n, data);
    let x_true = uniform_in_ball(&mut r, n);
    let b = a.matvec(&x_true, Exec::Sequential);
    Ok(LeastSquaresInstance { a, b, x_true })
}

impl LeastSquaresInstance {
    pub fn dim(&self) -> usize {
        self.a.cols()
    }

    /// `2 σ_max(A)²` via power iteration.
    pub fn lipschitz(&self, exec: Exec) -> f64 {
        let s = self.a.spectral_norm(500, 1e-10, exec);
        2.0 * s * s
    }

    pub fn to_lvlf(&self) -> Vec<LvlfArray> {
        vec![
            LvlfArray {
                rows: self.a.rows(),
                cols: self.a.cols(),
                data: self.a.data().to_vec(),
            },
            LvlfArray::column(self.b.clone()),
            LvlfArray::column(self.x_true.clone()),
        ]
    }

    pub fn from_lvlf(arrays: Vec<LvlfArray>) -> Result<Self> {
        let [a, b, x]: [LvlfArray; 3] = arrays
            .try_into()
            .map_err(|v: Vec<LvlfArray>| SolverError::Format(format!("expected 3 arrays, found {}", v.len())))?;
        check_dim(a.rows, b.data.len())?;
        check_dim(a.cols, x.data.len())?;
        Ok(Self {
            a: DenseMatrix::from_row_major(a.rows, a.cols, a.data),
            b: b.data,
            x_true: x.data,
        })
    }
}

/// `f(x) = ‖Ax − b‖²`, `∇f(x) = 2Aᵀ(Ax − b)`.
#[derive(Debug, Clone, Copy)]
pub struct LeastSquaresOracle<'a> {
    pub inst: &'a LeastSquaresInstance,
    pub exec: Exec,
}

pub fn ls_oracle(inst: &LeastSquaresInstance, exec: Exec) -> LeastSquaresOracle<'_> {
    LeastSquaresOracle { inst, exec }
}

impl FirstOrderOracle for LeastSquaresOracle<'_> {
    fn dim(&self) -> usize {
        self.inst.dim()
    }

    fn eval(&self, x: &[f64]) -> Evaluation {
        let r = sub(&self.inst.a.matvec(x, self.exec), &self.inst.b);
        let mut g = self.inst.a.matvec_t(&r, self.exec);
        g.iter_mut().for_each(|v| *v *= 2.0);
        Evaluation {
            value: dot(&r, &r),
            subgradient: g,
        }
    }

    fn value(&self, x: &[f64]) -> f64 {
        let r = sub(&self.inst.a.matvec(x, self.exec), &self.inst.b);
        dot(&r, &r)
    }
}
