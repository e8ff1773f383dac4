use thiserror::Error;

/// Errors raised by metric construction, evaluation and training.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("length mismatch: {what} has {found} entries, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("{what} = {value} is outside its valid range")]
    OutOfRange { what: &'static str, value: f64 },
    #[error("group {0} has no members")]
    EmptyGroup(u8),
    #[error("{what}[{index}] = {value} is not a binary 0/1 value")]
    NotBinary {
        what: &'static str,
        index: usize,
        value: u8,
    },
    #[error("sampling frequency K must be at least 1, got {0}")]
    InvalidK(usize),
    #[error("mini-batch lacks members of one group")]
    EmptyGroupInBatch,
    #[error("grid step {step} is not below half the minimum breakpoint gap {min_gap}")]
    GridTooCoarse { step: f64, min_gap: f64 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
