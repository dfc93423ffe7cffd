use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("polyhedron has {count} cuts but the projection kernel accepts at most {max}; truncate the bundle")]
    TooManyCuts { count: usize, max: usize },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error(
        "gap reduction exceeded {iterations} iterations in phase {phase} \
         (gap {gap:e}); check the smoothness assumptions or tolerances"
    )]
    IterationLimit {
        phase: usize,
        iterations: usize,
        gap: f64,
        incumbent: Vec<f64>,
        incumbent_value: f64,
        lower_bound: f64,
    },

    #[error("dual prox oracle failed: {0}")]
    DualProx(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed data: {0}")]
    Format(String),
}

pub type Result<T, E = SolverError> = std::result::Result<T, E>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(SolverError::DimensionMismatch { expected, got });
    }
    Ok(())
}

pub(crate) fn check_unit_interval(name: &'static str, value: f64) -> Result<()> {
    if !(value > 0.0 && value < 1.0) {
        return Err(SolverError::InvalidParameter {
            name,
            reason: format!("must lie in (0, 1), got {value}"),
        });
    }
    Ok(())
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if !(value > 0.0) || !value.is_finite() {
        return Err(SolverError::InvalidParameter {
            name,
            reason: format!("must be positive and finite, got {value}"),
        });
    }
    Ok(())
}
