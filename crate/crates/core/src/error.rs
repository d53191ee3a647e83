use thiserror::Error;

/// Errors raised by the numerical layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("wavefunctions live on different grids")]
    GridMismatch,
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("cannot normalize a zero-norm state")]
    ZeroNorm,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("interaction configured but no mean-field source state supplied")]
    MissingMeanFieldSource,
    #[error("Hamiltonian expectation has imaginary part {0:e}; operator assembly is not Hermitian")]
    NonHermitian(f64),
    #[error("singular linear system (zero pivot at row {0})")]
    Singular(usize),
    #[error("observer failed at step {step} (t = {time}): {message}")]
    Observer { step: usize, time: f64, message: String },
    #[error("too few snapshots: need at least {needed}, got {got}")]
    TooFewSnapshots { needed: usize, got: usize },
    #[error("snapshots share the same time {0}")]
    IdenticalTimes(f64),
    #[error("snapshot times are not uniformly spaced")]
    NonUniformTimes,
    #[error("epsilon list needs at least two distinct non-zero values")]
    DegenerateEpsilons,
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
