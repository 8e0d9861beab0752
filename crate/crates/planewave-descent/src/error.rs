//! Library-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite value at node {index} ({coords:?})")]
    NonFinite { index: usize, coords: Vec<f64> },

    #[error("singular sample of {what} at {coords:?}")]
    SingularSample { what: String, coords: Vec<f64> },

    #[error("unknown axis `{0}`")]
    UnknownAxis(String),

    #[error("index {index} out of range on axis `{axis}` with {points} points")]
    IndexOutOfRange {
        axis: String,
        index: usize,
        points: usize,
    },

    #[error("cannot slice a one-axis field down to zero axes")]
    DegenerateSlice,

    #[error("invalid analytic family: {0}")]
    InvalidFamily(String),

    #[error("invalid quadrature: {0}")]
    InvalidQuadrature(String),

    #[error("phi = {phi} is outside (0, 2*pi): the endpoint maps to the omega -> infinity point of the twistor chart")]
    TwistorDomain { phi: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("operator mismatch: {0}")]
    OperatorMismatch(String),

    #[error("complex argument required: {0}")]
    ComplexArgument(String),

    #[error("input does not decay: {0}")]
    NonDecaying(String),

    #[error("field not decayed at grid boundary (truncated support): {0}")]
    Truncation(String),

    #[error("under-resolved data: {0}")]
    UnderResolved(String),

    #[error("unsupported dimension {got}; supported: {supported}")]
    UnsupportedDimension { got: usize, supported: &'static str },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}
