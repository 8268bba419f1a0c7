use thiserror::Error;

/// Errors produced by model construction and the verification pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("size mismatch: expected {expected}, got {found}")]
    Size { expected: usize, found: usize },

    #[error("hidden-variable space must have at least 2 states, got {0}")]
    TrivialSpace(usize),

    #[error("labels: {0}")]
    Labels(String),

    #[error("observable {name}: value at index {index} is not finite")]
    NonFiniteValue { name: String, index: usize },

    #[error("invalid probability vector: {0}")]
    InvalidProbabilities(String),

    #[error("outcome {0} is not a realized value of the observable")]
    UnknownOutcome(f64),

    #[error("outcome {0} has zero probability under the prior")]
    ZeroEvidence(f64),

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("invalid coefficients: {0}")]
    InvalidCoefficients(String),

    #[error("operator is not symmetric/Hermitian: ||X - X^H||_F = {0:e}")]
    Asymmetric(f64),

    #[error("matrix is not unitary: ||X^H X - I||_F = {0:e}")]
    NonUnitary(f64),

    #[error("invalid basis change: ||Psi Psi^H - I||_F = {0:e}")]
    InvalidBasis(f64),

    #[error("basis mismatch: {left} vs {right}")]
    BasisMismatch { left: String, right: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_size(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Size { expected, found })
    }
}
