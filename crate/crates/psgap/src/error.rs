//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A computation would exceed a configured resource budget.
    #[error("{what} exceeds the configured budget of {budget}")]
    ResourceLimit { what: String, budget: u64 },

    /// A query reached past the data a table actually holds.
    #[error("{what} = {value} is out of range (maximum {max})")]
    OutOfRange {
        what: &'static str,
        value: u64,
        max: u64,
    },

    /// An intermediate value does not fit the target integer width.
    #[error("overflow: {0}")]
    Overflow(String),

    /// A parameter combination is outside the documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A value below the threshold where an iterated-log expression is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Two evaluation paths that must agree exactly did not.
    #[error("internal consistency violation: {0}")]
    Inconsistency(String),

    /// An exact identity was violated beyond its tolerance; signals a precision bug.
    #[error("identity violation: {0}")]
    IdentityViolation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
