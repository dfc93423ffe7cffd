//! Convergence traces and per-phase records.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::oracle::OracleCounts;

pub const CSV_HEADER: &str = "phase,iter,lb,ub,gap,fxu,oracle_calls,ns";

/// One row per solver iteration.
///
/// `lb`/`ub` are the best bounds known after the iteration, `fxu` is the
/// objective at the trial upper point `x̃ᵤ` of that iteration (NaN when the
/// phase ended before one was formed), and `iter` counts iterations across
/// all phases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub phase: usize,
    pub iter: u64,
    pub lb: f64,
    pub ub: f64,
    pub gap: f64,
    pub fxu: f64,
    pub oracle_calls: u64,
    pub ns: u64,
}

/// How a gap-reduction phase ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    /// Localizer empty or prox point left the ball: the level is a lower bound.
    LevelProven,
    /// Upper bound dropped below the level target.
    GapClosed,
    /// Smoothing check failed: the dual-size estimate was doubled.
    SmoothingDoubled,
}

impl Termination {
    /// Significant phases contract the gap.
    pub fn is_significant(self) -> bool {
        !matches!(self, Termination::SmoothingDoubled)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseRecord {
    pub index: usize,
    pub iterations: usize,
    pub lb_in: f64,
    pub ub_in: f64,
    pub lb_out: f64,
    pub ub_out: f64,
    pub termination: Termination,
    pub radius: f64,
    pub d_in: Option<f64>,
    pub d_out: Option<f64>,
    pub eta: Option<f64>,
    /// Incumbent at phase entry; only kept when iterate recording is on.
    pub x_hat_in: Option<Vec<f64>>,
}

impl PhaseRecord {
    pub fn gap_in(&self) -> f64 {
        self.ub_in - self.lb_in
    }

    pub fn gap_out(&self) -> f64 {
        self.ub_out - self.lb_out
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTrace {
    pub rows: Vec<TraceRow>,
    pub phases: Vec<PhaseRecord>,
}

impl ConvergenceTrace {
    pub fn total_iterations(&self) -> u64 {
        self.rows.last().map_or(0, |r| r.iter)
    }

    /// First iteration count at which the best upper bound reached `target`.
    pub fn iterations_to_reach(&self, target: f64) -> Option<u64> {
        self.rows.iter().find(|r| r.ub <= target).map(|r| r.iter)
    }

    /// Oracle calls spent when the best upper bound first reached `target`.
    pub fn calls_to_reach(&self, target: f64) -> Option<u64> {
        self.rows
            .iter()
            .find(|r| r.ub <= target)
            .map(|r| r.oracle_calls)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{:e},{:e},{:e},{:e},{},{}",
                r.phase, r.iter, r.lb, r.ub, r.gap, r.fxu, r.oracle_calls, r.ns
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv is ascii")
    }

    /// Appends another trace, renumbering phases and offsetting cumulative
    /// iteration and call counters.
    pub fn append(&mut self, other: &ConvergenceTrace) {
        let phase_off = self.phases.len();
        let iter_off = self.total_iterations();
        let call_off = self.rows.last().map_or(0, |r| r.oracle_calls);
        self.rows.extend(other.rows.iter().map(|r| TraceRow {
            phase: r.phase + phase_off,
            iter: r.iter + iter_off,
            oracle_calls: r.oracle_calls + call_off,
            ..*r
        }));
        self.phases.extend(other.phases.iter().cloned().map(|mut p| {
            p.index += phase_off;
            p
        }));
    }
}

/// Final state of a solver run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Converged,
    BudgetExhausted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub x: Vec<f64>,
    pub ub: f64,
    pub lb: f64,
    pub status: SolveStatus,
    pub counts: OracleCounts,
    pub trace: ConvergenceTrace,
}

impl SolveReport {
    pub fn gap(&self) -> f64 {
        self.ub - self.lb
    }
}
