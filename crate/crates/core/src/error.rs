use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate mesh: cell {cell} has non-positive area {area:e}")]
    DegenerateMesh { cell: usize, area: f64 },

    #[error("mesh validation failed: {0}")]
    Validation(String),

    #[error(
        "CFL condition violated at step {step} in cell {cell}: inflow weight {weight:.17} exceeds {limit:.17}"
    )]
    CflViolation {
        step: usize,
        cell: usize,
        weight: f64,
        limit: f64,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: msg.into(),
        }
    }
}
