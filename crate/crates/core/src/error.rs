use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("dimension {k} out of range 0..={max}")]
    DimensionOutOfRange { k: usize, max: usize },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("constraint realization failed: {0}")]
    Realization(String),
    #[error("face sets belong to different ambient complexes")]
    MismatchedComplex,
    #[error("candidate pool has {size} faces, exhaustive search is capped at {cap}; use local search")]
    PoolTooLarge { size: usize, cap: usize },
    #[error("no feasible face set exists for the given constraints")]
    Infeasible,
    #[error("degenerate input: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;
