use thiserror::Error;

/// Errors raised by the numerical routines, estimators and the command line front end.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("no convergence: {0}")]
    NonConvergence(String),

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("numerical instability: {0}")]
    NumericalInstability(String),

    #[error("no root: {0}")]
    NoRoot(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("severity puts mass at zero ({0})")]
    SeverityMassAtZero(f64),

    #[error("severity is not normalized: total mass {0}")]
    UnnormalizedSeverity(f64),

    #[error("mesh too coarse: {0}")]
    MeshTooCoarse(String),

    #[error("out of range: {0}")]
    OutOfRange(String),

    #[error("insufficient cells: {0}")]
    InsufficientCells(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
