use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration ({invariant}): {detail}")]
    InvalidConfig {
        invariant: &'static str,
        detail: String,
    },

    #[error("invalid frequency grid: {0}")]
    InvalidGrid(String),

    #[error("invalid direction: {0}")]
    InvalidDirection(String),

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("transmit power {used} exceeds budget {budget}")]
    PowerConstraint { used: f64, budget: f64 },

    #[error("RIS design degenerate at element (x={x}, y={y}): equivalent channel vanishes")]
    DegenerateDesign { x: usize, y: usize },

    #[error("cannot normalise a zero-norm column")]
    ZeroNorm,

    #[error("index {index} out of range for {what} (len {len})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },

    #[error("scenario file: {0}")]
    Scenario(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
