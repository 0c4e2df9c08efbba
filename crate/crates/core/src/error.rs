use thiserror::Error;

/// Errors raised by sheaf construction, operators and solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SheafError {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid sheaf: {0}")]
    InvalidSheaf(String),

    #[error("invalid linear map: {0}")]
    InvalidMap(String),

    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: String,
        expected: usize,
        actual: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid program: {0}")]
    InvalidProgram(String),

    #[error("potential on edge {edge} is not differentiable; use the prox-based solver instead")]
    NotDifferentiable { edge: usize },
}

pub type Result<T> = std::result::Result<T, SheafError>;

pub(crate) fn check_len(context: impl FnOnce() -> String, expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(SheafError::DimensionMismatch {
            context: context(),
            expected,
            actual,
        })
    }
}
