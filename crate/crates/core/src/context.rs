//! Per-run bookkeeping: oracle counters, trace rows, timing, observers.

use std::time::Instant;

use crate::oracle::{Evaluation, FirstOrderOracle, OracleCounts};
use crate::projection::{Cut, Polyhedron};
use crate::trace::{ConvergenceTrace, PhaseRecord, TraceRow};

/// Smoothed and true objective values at the same point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingSample {
    pub eta: f64,
    pub f_eta: f64,
    pub f_true: f64,
}

/// Snapshot of one gap-reduction iteration, handed to observers.
#[derive(Debug)]
pub struct IterationEvent<'a> {
    pub phase: usize,
    pub k: usize,
    pub center: &'a [f64],
    pub radius: f64,
    pub level: f64,
    pub x_lower: &'a [f64],
    pub lower_cut: &'a Cut,
    /// Localizer the prox point was projected onto (previous bundle plus
    /// the new level cut).
    pub localizer: &'a Polyhedron,
    /// `None` when the localizer was empty.
    pub x_prox: Option<&'a [f64]>,
    pub x_upper: &'a [f64],
    pub f_upper: f64,
    pub smoothing_trial: Option<SmoothingSample>,
    pub smoothing_lower: Option<SmoothingSample>,
}

/// Hook for audits and instrumentation. All methods default to no-ops.
pub trait SolverObserver {
    fn on_iteration(&mut self, _event: &IterationEvent<'_>) {}

    fn on_phase(&mut self, _record: &PhaseRecord) {}
}

pub struct RunContext<'o> {
    pub(crate) counts: OracleCounts,
    pub(crate) trace: ConvergenceTrace,
    pub(crate) record_time: bool,
    observer: Option<&'o mut dyn SolverObserver>,
    start: Instant,
    iterations: u64,
}

impl<'o> RunContext<'o> {
    pub fn new(record_time: bool) -> Self {
        Self {
            counts: OracleCounts::default(),
            trace: ConvergenceTrace::default(),
            record_time,
            observer: None,
            start: Instant::now(),
            iterations: 0,
        }
    }

    pub fn with_observer(mut self, observer: Option<&'o mut dyn SolverObserver>) -> Self {
        self.observer = observer;
        self
    }

    pub fn iterations(&self) -> u64 {
        self.iterations
    }

    pub fn counts(&self) -> OracleCounts {
        self.counts
    }

    pub fn into_parts(self) -> (ConvergenceTrace, OracleCounts) {
        (self.trace, self.counts)
    }

    pub(crate) fn eval<O: FirstOrderOracle + ?Sized>(&mut self, oracle: &O, x: &[f64]) -> Evaluation {
        self.counts.first_order += 1;
        oracle.eval(x)
    }

    pub(crate) fn value<O: FirstOrderOracle + ?Sized>(&mut self, oracle: &O, x: &[f64]) -> f64 {
        self.counts.value += 1;
        oracle.value(x)
    }

    fn elapsed_ns(&self) -> u64 {
        if self.record_time {
            self.start.elapsed().as_nanos() as u64
        } else {
            0
        }
    }

    /// Row for the initialization step (phase 0, iteration 0).
    pub(crate) fn record_init(&mut self, lb: f64, ub: f64, fxu: f64) {
        let row = TraceRow {
            phase: 0,
            iter: self.iterations,
            lb,
            ub,
            gap: ub - lb,
            fxu,
            oracle_calls: self.counts.total(),
            ns: self.elapsed_ns(),
        };
        self.trace.rows.push(row);
    }

    pub(crate) fn record_iteration(&mut self, phase: usize, lb: f64, ub: f64, fxu: f64) {
        self.iterations += 1;
        let row = TraceRow {
            phase,
            iter: self.iterations,
            lb,
            ub,
            gap: ub - lb,
            fxu,
            oracle_calls: self.counts.total(),
            ns: self.elapsed_ns(),
        };
        self.trace.rows.push(row);
    }

    pub(crate) fn notify(&mut self, event: &IterationEvent<'_>) {
        if let Some(obs) = self.observer.as_deref_mut() {
            obs.on_iteration(event);
        }
    }

    pub(crate) fn push_phase(&mut self, record: PhaseRecord) {
        if let Some(obs) = self.observer.as_deref_mut() {
            obs.on_phase(&record);
        }
        self.trace.phases.push(record);
    }

    pub(crate) fn has_observer(&self) -> bool {
        self.observer.is_some()
    }
}
