use alloc::string::String;

use crate::geometry::Point;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numeric failure in {op}: {detail}")]
    NumericFailure { op: &'static str, detail: String },

    /// Map evaluated outside its domain of validity.
    #[error("point {point:?} is outside the domain of {map}")]
    OutsideMapDomain { map: &'static str, point: Point },

    #[error("parse error at byte {offset}: expected {expected}")]
    Parse { offset: usize, expected: String },

    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownName { name: String, offset: usize },

    #[error("sampling failure: acceptance rate {rate:.3e} after {tries} proposals")]
    SamplingFailure { rate: f64, tries: u64 },

    #[error("configuration error: {0}")]
    Configuration(String),

    /// Nonpositive or non-finite Jacobian where a quasiconformal map needs J > 0.
    #[error("degenerate map at {point:?}: jacobian {jacobian}")]
    DegenerateMap { point: Point, jacobian: f64 },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Configuration(msg.into())
    }
}
