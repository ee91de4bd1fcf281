use thiserror::Error;

use crate::cnf::ParseError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("composite dimension {requested} exceeds the memory bound of {limit}")]
    DimensionLimit { requested: usize, limit: usize },

    #[error("layout mismatch: {0}")]
    LayoutMismatch(String),

    #[error("subsystem index {index} out of range for {factors} factors")]
    IndexOutOfRange { index: usize, factors: usize },

    #[error("invalid subsystem selection: {0}")]
    InvalidSelection(String),

    #[error("not a permutation: {0:?}")]
    NotPermutation(Vec<usize>),

    #[error("matrix is not Hermitian (deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not unitary (deviation {deviation:e})")]
    NotUnitary { deviation: f64 },

    #[error("shape mismatch: expected {expected}, got {found}")]
    ShapeMismatch { expected: String, found: String },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("fixed-point iteration did not converge after {iterations} iterations (best residual {best_residual:e})")]
    Convergence { iterations: usize, best_residual: f64 },

    #[error("fixed point is stale for this input (residual {residual:e} exceeds {tolerance:e})")]
    StaleFixedPoint { residual: f64, tolerance: f64 },

    #[error(transparent)]
    Parse(#[from] ParseError),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
