use thiserror::Error;

/// Errors raised when an operation's preconditions are not met.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dimension {0}: must be at least 1")]
    InvalidDimension(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{name} = {value} is outside the allowed range {range}")]
    ParameterOutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("operator is not Hermitian: max |X - X^dag| = {0:e}")]
    NotHermitian(f64),

    #[error("operator is not positive semidefinite: min eigenvalue {0:e}")]
    NotPositive(f64),

    #[error("trace {trace} is inconsistent with trace deficit {deficit}")]
    TraceMismatch { trace: f64, deficit: f64 },

    #[error("operator is not an orthogonal projector: residual {0:e}")]
    NotProjector(f64),

    #[error("sequence is not in decreasing order at index {0}")]
    NotDecreasing(usize),

    #[error("negative weight {value} at index {index}")]
    NegativeWeight { index: usize, value: f64 },

    #[error("weights sum to {0}, expected 1")]
    NotNormalized(f64),

    #[error("truncation error estimate {estimate:e} exceeds bound {bound:e}")]
    Truncation { estimate: f64, bound: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
