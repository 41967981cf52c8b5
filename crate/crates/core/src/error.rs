use thiserror::Error;

/// Errors produced by the matrix kernels, criteria, selectors and X3C tooling.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix is rank deficient: numerical rank {rank} < {required}")]
    RankDeficient { rank: usize, required: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("generation failed: {0}")]
    GenerationFailed(String),

    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
