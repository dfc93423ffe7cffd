//! Optimal uniformly-convergent level methods for convex optimization.

pub mod baselines;
pub mod context;
pub mod error;
pub mod fapl;
pub mod fusl;
pub mod linalg;
pub mod oracle;
pub mod problems;
pub mod projection;
pub mod strongly_convex;
pub mod trace;
pub mod unconstrained;

pub use context::{IterationEvent, RunContext, SmoothingSample, SolverObserver};
pub use error::{Result, SolverError};
pub use fapl::{fapl_solve, gap_reduction_fapl, LevelParams, LowerBoundInit, StepsizeScheme};
pub use linalg::{DenseMatrix, Exec};
pub use oracle::{Ball, Evaluation, FirstOrderOracle, HolderClass};
pub use projection::{project, Cut, Polyhedron, ProjectionConfig, ProjectionOutcome};
pub use trace::{ConvergenceTrace, SolveReport, SolveStatus, Termination};
