use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The effective two-level reduction only holds below the Autler–Townes threshold.
    #[error("outside model domain: {0}")]
    Domain(String),

    #[error("no solution: {0}")]
    NoSolution(String),

    /// Group delay is undefined (coherent reflection vanishes).
    #[error("singular point: {0}")]
    Singular(String),

    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("bad sampling grid: {0}")]
    BadGrid(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("integrator failed to meet tolerance: {0}")]
    ToleranceNotMet(String),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("fit diverged: {0}")]
    FitDiverged(String),

    #[error("fit did not converge after {0} iterations")]
    NotConverged(usize),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("underdetermined: {0}")]
    Underdetermined(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
