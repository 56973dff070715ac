use thiserror::Error;

/// Errors surfaced by the sampling, learning and protocol layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {context} (expected {expected}, got {actual})")]
    Dimension {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("noise rate {0} outside [0, 0.5)")]
    ThetaOutOfRange(f64),

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("majority vote over an empty bin")]
    EmptyBin,

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("attack budget exceeded: {needed} candidates needed, budget {budget}")]
    BudgetExceeded { needed: u128, budget: u64 },

    #[error("unsupported: {0}")]
    Unsupported(&'static str),

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(context: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::Dimension {
            context,
            expected,
            actual,
        })
    }
}
