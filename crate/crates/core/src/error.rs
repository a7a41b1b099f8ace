//! Error type shared by every module of the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument is outside its admissible range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Two inputs that must agree in length or dimension do not.
    #[error("shape mismatch: expected {expected}, got {actual}")]
    Shape { expected: String, actual: String },

    /// The requested computation exceeds the configured work cap.
    #[error("complexity guard: {work} operations exceeds cap {cap}; {hint}")]
    Complexity { work: u128, cap: u128, hint: String },

    /// Every permutation received zero joint density.
    #[error("degenerate density: all permutations have zero density")]
    DegenerateDensity,

    /// A linear solve, factorization or iteration failed.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// No pool value satisfies the bounded-query constraint.
    #[error("bound infeasible: smallest candidate value {smallest} violates the constraint")]
    BoundInfeasible { smallest: f64 },

    /// Malformed experiment configuration.
    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn shape(expected: impl ToString, actual: impl ToString) -> Self {
        Error::Shape {
            expected: expected.to_string(),
            actual: actual.to_string(),
        }
    }

    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
