//! Objective abstractions shared by every solver: the first-order oracle,
//! the linearization `h(z, x) = f(z) + <f'(z), x - z>`, and linear
//! minimization over a Euclidean ball.

use std::cell::Cell;

use crate::error::{check_dim, check_positive, Result, SolverError};
use crate::linalg::{dot, norm};

/// Function value together with one subgradient.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub value: f64,
    pub subgradient: Vec<f64>,
}

/// Black-box convex objective returning `f(x)` and some `f'(x) ∈ ∂f(x)`.
///
/// Implementations must be pure in `x`. Call counting is done by the solver
/// run that owns a [`CountingOracle`], never by the oracle itself.
pub trait FirstOrderOracle: Sync {
    fn dim(&self) -> usize;

    fn eval(&self, x: &[f64]) -> Evaluation;

    /// Value only. Override when it is cheaper than a full evaluation.
    fn value(&self, x: &[f64]) -> f64 {
        self.eval(x).value
    }
}

impl<T: FirstOrderOracle + ?Sized> FirstOrderOracle for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn eval(&self, x: &[f64]) -> Evaluation {
        (**self).eval(x)
    }
    fn value(&self, x: &[f64]) -> f64 {
        (**self).value(x)
    }
}

/// Hölder smoothness class `(M, ρ)`; consumed by bound audits only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderClass {
    pub m: f64,
    pub rho: f64,
}

impl HolderClass {
    pub fn new(m: f64, rho: f64) -> Result<Self> {
        check_positive("M", m)?;
        if !(0.0..=1.0).contains(&rho) {
            return Err(SolverError::InvalidParameter {
                name: "rho",
                reason: format!("must lie in [0, 1], got {rho}"),
            });
        }
        Ok(Self { m, rho })
    }

    /// Lipschitz-smooth objectives: `M = L`, `ρ = 1`.
    pub fn smooth(lipschitz: f64) -> Result<Self> {
        Self::new(lipschitz, 1.0)
    }
}

/// Closed Euclidean ball `B(center, radius)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Result<Self> {
        check_positive("radius", radius)?;
        Ok(Self { center, radius })
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn contains(&self, x: &[f64], rel_tol: f64) -> bool {
        crate::linalg::dist(x, &self.center) <= self.radius * (1.0 + rel_tol)
    }

    /// Euclidean projection onto the ball.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        let d = crate::linalg::dist(x, &self.center);
        if d <= self.radius {
            return x.to_vec();
        }
        let s = self.radius / d;
        self.center
            .iter()
            .zip(x)
            .map(|(c, xi)| c + (xi - c) * s)
            .collect()
    }
}

/// `h(z, x) = f(z) + <f'(z), x - z>`.
pub fn linear_model(value_at_z: f64, subgradient: &[f64], z: &[f64], x: &[f64]) -> Result<f64> {
    check_dim(subgradient.len(), z.len())?;
    check_dim(subgradient.len(), x.len())?;
    let shift: f64 = subgradient
        .iter()
        .zip(x.iter().zip(z))
        .map(|(g, (xi, zi))| g * (xi - zi))
        .sum();
    Ok(value_at_z + shift)
}

/// Minimizes the linear model `h(z, ·)` over `ball`.
///
/// With a zero subgradient the model is constant and the center is returned.
pub fn min_linear_over_ball(
    value_at_z: f64,
    g: &[f64],
    z: &[f64],
    ball: &Ball,
) -> Result<(Vec<f64>, f64)> {
    check_dim(ball.dim(), g.len())?;
    check_dim(ball.dim(), z.len())?;
    let gn = norm(g);
    if gn == 0.0 {
        return Ok((ball.center.clone(), value_at_z));
    }
    let s = ball.radius / gn;
    let minimizer: Vec<f64> = ball
        .center
        .iter()
        .zip(g)
        .map(|(c, gi)| c - s * gi)
        .collect();
    let min_value = linear_model(value_at_z, g, z, &minimizer)?;
    Ok((minimizer, min_value))
}

/// Per-run oracle call tallies, split by what was requested.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct OracleCounts {
    /// Value plus (sub)gradient, including smoothed evaluations.
    pub first_order: u64,
    /// Value-only evaluations.
    pub value: u64,
    /// Exact evaluations of the nonsmooth part used for upper bounds.
    pub exact: u64,
}

impl OracleCounts {
    pub fn total(&self) -> u64 {
        self.first_order + self.value + self.exact
    }

    pub fn merge(&mut self, other: &OracleCounts) {
        self.first_order += other.first_order;
        self.value += other.value;
        self.exact += other.exact;
    }
}

/// Wraps an oracle for the duration of one solver run and counts calls.
pub struct CountingOracle<'a, O: ?Sized> {
    inner: &'a O,
    first_order: Cell<u64>,
    value: Cell<u64>,
}

impl<'a, O: FirstOrderOracle + ?Sized> CountingOracle<'a, O> {
    pub fn new(inner: &'a O) -> Self {
        Self {
            inner,
            first_order: Cell::new(0),
            value: Cell::new(0),
        }
    }

    pub fn dim(&self) -> usize {
        self.inner.dim()
    }

    pub fn eval(&self, x: &[f64]) -> Evaluation {
        self.first_order.set(self.first_order.get() + 1);
        self.inner.eval(x)
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.value.set(self.value.get() + 1);
        self.inner.value(x)
    }

    pub fn counts(&self) -> OracleCounts {
        OracleCounts {
            first_order: self.first_order.get(),
            value: self.value.get(),
            exact: 0,
        }
    }
}

/// `f(x) = w ‖x - target‖²`.
#[derive(Debug, Clone)]
pub struct ShiftedSquaredNorm {
    pub target: Vec<f64>,
    pub weight: f64,
}

impl FirstOrderOracle for ShiftedSquaredNorm {
    fn dim(&self) -> usize {
        self.target.len()
    }

    fn eval(&self, x: &[f64]) -> Evaluation {
        let d: Vec<f64> = x.iter().zip(&self.target).map(|(a, b)| a - b).collect();
        Evaluation {
            value: self.weight * dot(&d, &d),
            subgradient: d.iter().map(|v| 2.0 * self.weight * v).collect(),
        }
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.weight * crate::linalg::dist(x, &self.target).powi(2)
    }
}
