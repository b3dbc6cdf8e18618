use thiserror::Error;

/// Failure modes of the solver and analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum KsError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite sample {value} at index {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("expected {expected} samples, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("blow-up at step {step}: mode {mode} reached magnitude {magnitude:e}")]
    BlowUp { step: usize, mode: i64, magnitude: f64 },

    #[error("linear propagator overflows for mode {mode} (exponent {exponent:e})")]
    PropagatorOverflow { mode: i64, exponent: f64 },

    #[error("trajectory is empty")]
    EmptyTrajectory,

    #[error("no slices at or after t_transient = {t_transient}")]
    NoPostTransientSlices { t_transient: f64 },

    #[error("degenerate perturbation: {0}")]
    DegeneratePerturbation(String),

    #[error("separation left the rescaling range at t = {time}: norm = {norm:e}")]
    SeparationOutOfRange { time: f64, norm: f64 },
}

pub type Result<T> = std::result::Result<T, KsError>;
