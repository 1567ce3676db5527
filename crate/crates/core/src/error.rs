//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by construction, validation and numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violated its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Malformed input data (file contents, tables).
    #[error("data error: {0}")]
    Data(String),

    /// Parse failure with the offending line number.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// A frequency fell outside the span a model is declared valid on.
    #[error("out of range: {0}")]
    OutOfRange(String),

    /// Signal/idler band geometry is inconsistent with the pump center.
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    /// Frequencies failed SFWM energy conservation.
    #[error("invalid frequency combination: {0}")]
    InvalidCombination(String),

    /// A closed form was requested outside its asymptotic validity regime.
    #[error("asymptotic validity violated: {0}")]
    AsymptoticValidity(String),

    /// Grid too coarse to resolve the requested spectral feature.
    #[error("resolution error: {0}")]
    Resolution(String),

    /// Degenerate numerical input (all-zero matrix, zero denominators, ...).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A root bracket did not contain a sign change.
    #[error("bracket error: {0}")]
    Bracket(String),

    /// Requested quantity is undefined for the given inputs.
    #[error("undefined: {0}")]
    Undefined(String),

    /// Quantum state failed its validity checks.
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// A numerical routine failed to converge within its budget.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
