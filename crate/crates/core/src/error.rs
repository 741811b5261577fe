use thiserror::Error;

/// Errors raised by channel construction, optimization and numerics.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("infeasible constraint: {0}")]
    Constraint(String),

    #[error("structure error: {0}")]
    Structure(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

impl Error {
    /// Numeric failures are reported separately from bad input by the CLI.
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::Numeric(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
