use serde::{Deserialize, Serialize};

/// Stepsize rules for the `α_k` sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum StepsizeScheme {
    /// `α_k = 2/(k+1)`; certified for every `ρ` at once.
    #[default]
    Polynomial,
    /// `α_1 = 1`, `α_k² = (1 − α_k) γ_{k−1}`.
    Recursive,
}

impl StepsizeScheme {
    /// Constant `c(ρ)` for which `γ_k ‖τ_k(ρ)‖ ≤ c k^{−(1+3ρ)/2}` holds.
    pub fn c_of_rho(self, rho: f64) -> f64 {
        match self {
            StepsizeScheme::Polynomial => 2f64.powf(1.0 + rho) * 3f64.powf(-(1.0 - rho) / 2.0),
            StepsizeScheme::Recursive => 4.0 / 3f64.powf((1.0 - rho) / 2.0),
        }
    }

    pub fn schedule(self) -> StepsizeSchedule {
        StepsizeSchedule {
            scheme: self,
            k: 0,
            gamma: 1.0,
        }
    }
}

/// Yields `α_1, α_2, …` and tracks `γ_k = γ_{k−1}(1 − α_k)`.
#[derive(Debug, Clone)]
pub struct StepsizeSchedule {
    scheme: StepsizeScheme,
    k: u64,
    gamma: f64,
}

impl StepsizeSchedule {
    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

impl Iterator for StepsizeSchedule {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        self.k += 1;
        let alpha = if self.k == 1 {
            1.0
        } else {
            match self.scheme {
                StepsizeScheme::Polynomial => 2.0 / (self.k as f64 + 1.0),
                StepsizeScheme::Recursive => {
                    // positive root of α² + γα − γ = 0
                    let g = self.gamma;
                    2.0 * g / (g + (g * g + 4.0 * g).sqrt())
                }
            }
        };
        if self.k == 1 {
            self.gamma = 1.0;
        } else {
            self.gamma *= 1.0 - alpha;
        }
        Some(alpha)
    }
}

/// `α_k` for a single `k ≥ 1`.
pub fn stepsize(scheme: StepsizeScheme, k: u64) -> f64 {
    assert!(k >= 1, "stepsizes are indexed from 1");
    scheme
        .schedule()
        .nth((k - 1) as usize)
        .expect("schedule is infinite")
}
