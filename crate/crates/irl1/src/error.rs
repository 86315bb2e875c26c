//! Crate-wide error type.

use std::fmt;

/// Errors produced by solvers, problem construction and the benchmark harness.
#[derive(Debug)]
pub enum Error {
    /// An argument violated a documented precondition (negative weight,
    /// nonpositive step size, parameter out of range, ...).
    InvalidArgument(String),
    /// A value was outside the mathematical domain of an operation.
    Domain(String),
    /// Two quantities that must have matching dimensions did not.
    DimensionMismatch { expected: usize, found: usize },
    /// The input is degenerate (e.g. a zero matrix has no spectral norm).
    Degenerate(String),
    /// A numerical failure at run time: non-finite iterate, exhausted line
    /// search, or a violated decrease certificate.
    Numerical(String),
    /// The requested computation does not fit the configured memory budget.
    MemoryBudget { required_bytes: u64, budget_bytes: u64 },
    /// Malformed input while parsing a file.
    Parse(String),
    /// I/O failure.
    Io(std::io::Error),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::Degenerate(msg) => write!(f, "degenerate input: {msg}"),
            Error::Numerical(msg) => write!(f, "numerical error: {msg}"),
            Error::MemoryBudget { required_bytes, budget_bytes } => write!(
                f,
                "memory budget exceeded: need {required_bytes} bytes, budget {budget_bytes} bytes"
            ),
            Error::Parse(msg) => write!(f, "parse error: {msg}"),
            Error::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
