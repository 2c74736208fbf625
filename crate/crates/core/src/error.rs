use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A covariance model failed validation (asymmetric, not positive definite, ...).
    #[error("invalid covariance model: {0}")]
    Model(String),

    /// The test statistic does not exist for this data (e.g. T² with p >= N).
    #[error("test undefined: {0}")]
    UndefinedTest(String),

    /// The data are degenerate (zero total variance and the like).
    #[error("degenerate data: {0}")]
    Degenerate(String),

    /// A variance estimate used to standardize a statistic is not positive.
    #[error("cannot standardize: {0}")]
    Standardization(String),

    /// A numerical routine failed to produce a finite answer.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// Malformed text input.
    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    /// An experiment specification failed validation; one entry per violation.
    #[error("invalid experiment spec: {}", .0.join("; "))]
    Spec(Vec<String>),
}

impl Error {
    /// True for failures caused by the numbers rather than by the caller.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Degenerate(_) | Error::Standardization(_) | Error::Numeric(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
