use thiserror::Error;

/// Errors shared across the crate.  Numerical aborts carry the time at
/// which the integrator detected a non-finite value.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("zero finder lost its bracket for n = {n}: [{lo}, {hi}] has no sign change")]
    ZeroBracket { n: usize, lo: f64, hi: f64 },

    #[error("nodal field belongs to grid {field:#x}, basis uses grid {basis:#x}")]
    GridMismatch { field: u64, basis: u64 },

    #[error("non-finite state at t = {t}")]
    NumericalAbort { t: f64 },

    #[error("{excluded} of {total} trajectories violated conservation tolerances (cap {cap_percent}%)")]
    ExclusionRate {
        excluded: usize,
        total: usize,
        cap_percent: f64,
    },

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
