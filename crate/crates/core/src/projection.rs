//! Exact Euclidean projection onto a polyhedron with few cuts.
//!
//! The projection `argmin_{x ∈ Q} ½‖x − p‖²` with `Q = {x : <Aᵢ, x> ≤ bᵢ}` is
//! solved through its nonnegative dual `max_{λ≥0} −½ λᵀMλ + Cᵀλ` where
//! `M_ij = <Aᵢ, Aⱼ>` and `Cᵢ = <Aᵢ, p> − bᵢ`. The dual KKT system
//! `Mλ − μ = C`, `λ, μ ≥ 0`, `λᵢμᵢ = 0` is solved by enumerating all `2^m`
//! complementarity patterns. A pattern (mask) fixes which `λᵢ` may be
//! nonzero; the rest of the unknowns follow from one small linear solve.
//! The first pattern in popcount-then-lexicographic order whose solution is
//! sign-feasible is accepted, and the primal point is `x = p − Σ λᵢ Aᵢ`.
//! If no pattern is sign-feasible the dual is unbounded, i.e. `Q = ∅`.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{check_dim, Result, SolverError};
use crate::linalg::{dot, norm, norm_inf, solve_dense, Exec};

pub const DEFAULT_MAX_CUTS: usize = 10;

const PIVOT_TOL: f64 = 1e-12;

/// A half-space `<normal, x> ≤ offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cut {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl Cut {
    pub fn new(normal: Vec<f64>, offset: f64) -> Self {
        Self { normal, offset }
    }

    pub fn slack(&self, x: &[f64]) -> f64 {
        self.offset - dot(&self.normal, x)
    }
}

/// Intersection of half-spaces, possibly empty and possibly unbounded.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Polyhedron {
    cuts: Vec<Cut>,
}

impl Polyhedron {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_cuts(cuts: Vec<Cut>) -> Self {
        Self { cuts }
    }

    pub fn push(&mut self, cut: Cut) {
        self.cuts.push(cut);
    }

    pub fn cuts(&self) -> &[Cut] {
        &self.cuts
    }

    pub fn count(&self) -> usize {
        self.cuts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cuts.is_empty()
    }

    /// Largest constraint violation at `x` (0 when feasible).
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        self.cuts
            .iter()
            .map(|c| -c.slack(x))
            .fold(0.0f64, f64::max)
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.cuts.iter().all(|c| c.slack(x) >= -tol)
    }
}

/// Dual data `M` (Gram matrix of the normals) and `C`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualSystem {
    pub m: usize,
    /// Row-major `m × m`.
    pub gram: Vec<f64>,
    pub linear: Vec<f64>,
}

impl DualSystem {
    pub fn gram_at(&self, i: usize, j: usize) -> f64 {
        self.gram[i * self.m + j]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProjectionOutcome {
    Feasible { x_star: Vec<f64>, lambda: Vec<f64> },
    Infeasible,
}

impl ProjectionOutcome {
    pub fn point(&self) -> Option<&[f64]> {
        match self {
            ProjectionOutcome::Feasible { x_star, .. } => Some(x_star),
            ProjectionOutcome::Infeasible => None,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ProjectionConfig {
    pub max_cuts: usize,
    /// Sign tolerance is `tol_scale · (1 + ‖p‖)`.
    pub tol_scale: f64,
    pub exec: Exec,
}

impl Default for ProjectionConfig {
    fn default() -> Self {
        Self {
            max_cuts: DEFAULT_MAX_CUTS,
            tol_scale: 1e-10,
            exec: Exec::default(),
        }
    }
}

pub fn assemble_dual(q: &Polyhedron, p: &[f64]) -> Result<DualSystem> {
    let m = q.count();
    for c in q.cuts() {
        check_dim(p.len(), c.normal.len())?;
    }
    let mut gram = vec![0.0; m * m];
    for i in 0..m {
        for j in i..m {
            let v = dot(&q.cuts[i].normal, &q.cuts[j].normal);
            gram[i * m + j] = v;
            gram[j * m + i] = v;
        }
    }
    let linear = q
        .cuts()
        .iter()
        .map(|c| dot(&c.normal, p) - c.offset)
        .collect();
    Ok(DualSystem { m, gram, linear })
}

/// Bit mask over cut indices; bit `i` set means `λᵢ` is free and `μᵢ = 0`.
pub type ActiveMask = u32;

/// Solves `Mλ − μ = C` under the complementarity pattern `active`.
///
/// Returns `None` when the reduced system `M_SS λ_S = C_S` is numerically
/// singular. No sign check happens here.
pub fn solve_kkt_case(sys: &DualSystem, active: ActiveMask) -> Option<(Vec<f64>, Vec<f64>)> {
    let m = sys.m;
    let idx: Vec<usize> = (0..m).filter(|i| active & (1 << i) != 0).collect();
    let k = idx.len();
    let mut lambda = vec![0.0; m];
    if k > 0 {
        let mut a = vec![0.0; k * k];
        for (r, &i) in idx.iter().enumerate() {
            for (c, &j) in idx.iter().enumerate() {
                a[r * k + c] = sys.gram_at(i, j);
            }
        }
        let rhs: Vec<f64> = idx.iter().map(|&i| sys.linear[i]).collect();
        let sol = solve_dense(k, &a, &rhs, PIVOT_TOL)?;
        for (&i, v) in idx.iter().zip(sol) {
            lambda[i] = v;
        }
    }
    let mu = (0..m)
        .map(|i| {
            if active & (1 << i) != 0 {
                0.0
            } else {
                (0..m).map(|j| sys.gram_at(i, j) * lambda[j]).sum::<f64>() - sys.linear[i]
            }
        })
        .collect();
    Some((lambda, mu))
}

/// All masks over `m` cuts ordered by popcount, then lexicographically by
/// the sorted index tuple.
pub fn mask_order(m: usize) -> std::sync::Arc<Vec<ActiveMask>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, std::sync::Arc<Vec<ActiveMask>>>>> =
        OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("mask cache poisoned");
    guard
        .entry(m)
        .or_insert_with(|| {
            let mut out = Vec::with_capacity(1 << m);
            for size in 0..=m {
                for combo in (0..m).combinations(size) {
                    out.push(combo.iter().fold(0, |acc, &i| acc | (1 << i)));
                }
            }
            std::sync::Arc::new(out)
        })
        .clone()
}

fn passes(lambda: &[f64], mu: &[f64], tol: f64) -> bool {
    lambda.iter().chain(mu).all(|&v| v >= -tol && v.is_finite())
}

/// Projects `p` onto `q`.
///
/// Cuts are rescaled to unit normals before the enumeration so that the
/// sign tolerance is measured in units of length; the reported multipliers
/// refer to the cuts as given.
pub fn project(p: &[f64], q: &Polyhedron, cfg: &ProjectionConfig) -> Result<ProjectionOutcome> {
    if q.count() > cfg.max_cuts || q.count() > 30 {
        return Err(SolverError::TooManyCuts {
            count: q.count(),
            max: cfg.max_cuts.min(30),
        });
    }
    for c in q.cuts() {
        check_dim(p.len(), c.normal.len())?;
    }
    let tol = cfg.tol_scale * (1.0 + norm(p));

    // Degenerate cuts 0 ≤ b are either vacuous or certify emptiness.
    let mut kept = Vec::with_capacity(q.count());
    let mut scales = Vec::with_capacity(q.count());
    for (i, c) in q.cuts().iter().enumerate() {
        let s = norm(&c.normal);
        if s == 0.0 {
            if c.offset < 0.0 {
                return Ok(ProjectionOutcome::Infeasible);
            }
            continue;
        }
        kept.push(i);
        scales.push(s);
    }
    let raw = Polyhedron::from_cuts(kept.iter().map(|&i| q.cuts[i].clone()).collect());
    let sys = assemble_dual(&raw, p)?;
    let m = sys.m;
    let normalized = DualSystem {
        m,
        gram: (0..m * m)
            .map(|t| sys.gram[t] / (scales[t / m] * scales[t % m]))
            .collect(),
        linear: (0..m).map(|i| sys.linear[i] / scales[i]).collect(),
    };

    // More than n active normals are linearly dependent, and some subset of
    // at most n of them reproduces the same projection.
    let max_active = p.len();
    let lambda_unit = find_first_passing(&normalized, max_active, tol, cfg.exec)
        .or_else(|| least_squares_fallback(&normalized, &raw, &scales, p, max_active, tol));

    let Some(lambda_unit) = lambda_unit else {
        return Ok(ProjectionOutcome::Infeasible);
    };

    let mut x_star = p.to_vec();
    let mut lambda = vec![0.0; q.count()];
    for (t, &i) in kept.iter().enumerate() {
        let l = lambda_unit[t].max(0.0) / scales[t];
        lambda[i] = l;
        if l != 0.0 {
            crate::linalg::axpy(-l, &q.cuts[i].normal, &mut x_star);
        }
    }
    Ok(ProjectionOutcome::Feasible { x_star, lambda })
}

fn find_first_passing(sys: &DualSystem, max_active: usize, tol: f64, exec: Exec) -> Option<Vec<f64>> {
    let all = mask_order(sys.m);
    let order = &all[..all.partition_point(|mk| mk.count_ones() as usize <= max_active)];
    let try_mask = |&mask: &ActiveMask| {
        solve_kkt_case(sys, mask).and_then(|(l, mu)| passes(&l, &mu, tol).then_some(l))
    };
    #[cfg(feature = "parallel")]
    if exec.is_parallel() && sys.m >= 8 {
        // Cheap small-popcount cases first; speculate in parallel on the rest
        // and commit the first passing mask in enumeration order.
        let head = order.iter().take_while(|&&mk| mk.count_ones() <= 2).count();
        if let Some(l) = order[..head].iter().find_map(try_mask) {
            return Some(l);
        }
        return order[head..].par_iter().find_map_first(try_mask);
    }
    let _ = exec;
    order.iter().find_map(try_mask)
}

/// Pseudo-inverse solves of each reduced system, accepted only if the
/// recovered point is feasible and satisfies the KKT conditions.
fn least_squares_fallback(
    sys: &DualSystem,
    raw: &Polyhedron,
    scales: &[f64],
    p: &[f64],
    max_active: usize,
    tol: f64,
) -> Option<Vec<f64>> {
    let m = sys.m;
    let all = mask_order(m);
    let end = all.partition_point(|mk| mk.count_ones() as usize <= max_active);
    for &mask in &all[1..end] {
        let idx: Vec<usize> = (0..m).filter(|i| mask & (1 << i) != 0).collect();
        let k = idx.len();
        let a = DMatrix::from_fn(k, k, |r, c| sys.gram_at(idx[r], idx[c]));
        let rhs = DVector::from_fn(k, |r, _| sys.linear[idx[r]]);
        let Ok(sol) = a.svd(true, true).solve(&rhs, 1e-12) else {
            continue;
        };
        let mut lambda = vec![0.0; m];
        for (&i, v) in idx.iter().zip(sol.iter()) {
            lambda[i] = *v;
        }
        if lambda.iter().any(|&v| v < -tol) {
            continue;
        }
        let mut x = p.to_vec();
        for (i, &l) in lambda.iter().enumerate() {
            crate::linalg::axpy(-l.max(0.0) / scales[i], &raw.cuts[i].normal, &mut x);
        }
        let feasible = raw
            .cuts()
            .iter()
            .zip(scales)
            .all(|(c, s)| c.slack(&x) / s >= -tol);
        let complementary = raw
            .cuts()
            .iter()
            .zip(scales)
            .zip(&lambda)
            .all(|((c, s), l)| (l.max(0.0) * c.slack(&x) / s).abs() <= tol * (1.0 + norm_inf(&lambda)));
        if feasible && complementary {
            return Some(lambda);
        }
    }
    None
}
