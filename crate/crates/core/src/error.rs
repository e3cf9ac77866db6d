use thiserror::Error;

/// Errors raised by the optimizer, its metrics and the sweep driver.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite coordinate {value} at index {coordinate}")]
    NonFinite { coordinate: usize, value: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("objective evaluation failed for particle {particle}: {source}")]
    Evaluation {
        particle: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("at least two particles are required for pairing, got {0}")]
    TooFewParticles(usize),

    #[error("unknown objective `{0}`")]
    UnknownObjective(String),

    #[error("unknown sweep axis `{0}`")]
    UnknownAxis(String),

    #[error("no cell has a positive success rate")]
    NoSuccessfulCells,

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("traces have mismatched lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
