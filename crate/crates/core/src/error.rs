use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("undefined input: {0}")]
    UndefinedInput(String),
    #[error("invalid potential: {0}")]
    InvalidPotential(String),
    #[error("invalid weight: {0}")]
    InvalidWeight(String),
    #[error("linear program {0}")]
    LinearProgram(String),
    #[error("extraction exhausted: {0}")]
    ExtractionExhausted(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("solver failed to converge after {iterations} iterations (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
