use std::collections::VecDeque;

use crate::linalg::{dot, sub};
use crate::oracle::Evaluation;
use crate::projection::{Cut, Polyhedron};

/// Level cut `h(z, x) ≤ l` stored as `<f'(z), x> ≤ l − f(z) + <f'(z), z>`.
pub fn level_cut(eval_at_z: &Evaluation, z: &[f64], level: f64) -> Cut {
    Cut::new(
        eval_at_z.subgradient.clone(),
        level - eval_at_z.value + dot(&eval_at_z.subgradient, z),
    )
}

/// Half-space `<x_k − x̄, x − x_k> ≥ 0` written as `<x̄ − x_k, x> ≤ <x̄ − x_k, x_k>`.
///
/// `None` when `x_k = x̄` (the half-space is the whole space).
pub fn prox_cut(x_k: &[f64], center: &[f64]) -> Option<Cut> {
    let normal = sub(center, x_k);
    if normal.iter().all(|&v| v == 0.0) {
        return None;
    }
    let offset = dot(&normal, x_k);
    Some(Cut::new(normal, offset))
}

/// The bundle `Q_k`: the prox half-space plus the most recent level cuts.
#[derive(Debug, Clone, PartialEq)]
pub struct Localizer {
    memory_depth: usize,
    prox: Option<Cut>,
    level_cuts: VecDeque<Cut>,
}

impl Localizer {
    /// `Q_0 = ℝⁿ`.
    pub fn new(memory_depth: usize) -> Self {
        Self {
            memory_depth,
            prox: None,
            level_cuts: VecDeque::new(),
        }
    }

    pub fn memory_depth(&self) -> usize {
        self.memory_depth
    }

    pub fn count(&self) -> usize {
        self.prox.is_some() as usize + self.level_cuts.len()
    }

    pub fn prox_cut(&self) -> Option<&Cut> {
        self.prox.as_ref()
    }

    pub fn level_cuts(&self) -> impl Iterator<Item = &Cut> {
        self.level_cuts.iter()
    }

    pub fn to_polyhedron(&self) -> Polyhedron {
        Polyhedron::from_cuts(self.prox.iter().chain(&self.level_cuts).cloned().collect())
    }

    /// `Q̲_k = Q_{k−1} ∩ {h(x_k^l, x) ≤ l}`.
    pub fn with_cut(&self, cut: &Cut) -> Polyhedron {
        let mut p = self.to_polyhedron();
        p.push(cut.clone());
        p
    }
}

/// Builds `Q_k` from `Q_{k−1}`, the newest level cut and the new prox point:
/// the prox half-space at `x_k` and the `memory_depth` most recent level cuts.
pub fn update_localizer(bundle: &Localizer, new_cut: Cut, x_k: &[f64], prox_center: &[f64]) -> Localizer {
    let mut level_cuts = bundle.level_cuts.clone();
    level_cuts.push_back(new_cut);
    while level_cuts.len() > bundle.memory_depth {
        level_cuts.pop_front();
    }
    Localizer {
        memory_depth: bundle.memory_depth,
        prox: prox_cut(x_k, prox_center),
        level_cuts,
    }
}
