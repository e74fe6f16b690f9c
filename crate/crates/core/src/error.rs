use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numeric error: {what} (estimate {estimate:e}, error estimate {error_estimate:e}, evaluations {evaluations})")]
    Numeric {
        what: String,
        estimate: f64,
        error_estimate: f64,
        evaluations: usize,
    },
    #[error("degenerate measure: Hankel form not positive definite at order {order}")]
    Degenerate { order: usize },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("resource bound exceeded: {0}")]
    Resource(String),
    #[error("shape mismatch: {0}")]
    Mismatch(String),
    #[error("out of range: {0}")]
    Range(String),
    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
