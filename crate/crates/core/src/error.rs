use std::fmt;

/// Errors raised by filter mutation, model evaluation, tuning and the harness.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Filter parameters violate `1 <= k <= m` or `counter_max >= 1`.
    InvalidParams(String),
    /// A counter targeted by an insert already sits at `counter_max`.
    Overflow { index: usize, counter_max: u32 },
    /// A counter targeted by a remove is zero, or the filter is empty.
    Underflow { index: Option<usize> },
    /// Decision threshold outside `0..=k`.
    InvalidThreshold { threshold: usize, k: usize },
    /// Digest length or indices do not match the filter parameters.
    DigestMismatch,
    /// A probability argument outside `[0, 1]` (or NaN).
    InvalidProbability(f64),
    /// The model needs at least one stored element.
    EmptyFilter,
    /// Empirical rates need a non-empty stored set.
    EmptyStoredSet,
    /// Brute-force oracle instance too large to enumerate.
    Oversized(String),
    /// Serialized filter could not be decoded.
    Format(String),
    /// Experiment configuration rejected.
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParams(msg) => write!(f, "invalid filter parameters: {msg}"),
            Error::Overflow { index, counter_max } => {
                write!(f, "counter overflow at position {index} (counter_max = {counter_max})")
            }
            Error::Underflow { index: Some(index) } => {
                write!(f, "counter underflow at position {index}")
            }
            Error::Underflow { index: None } => write!(f, "underflow: filter stores no elements"),
            Error::InvalidThreshold { threshold, k } => {
                write!(f, "decision threshold {threshold} outside 0..={k}")
            }
            Error::DigestMismatch => write!(f, "digest does not match filter parameters"),
            Error::InvalidProbability(p) => write!(f, "probability {p} outside [0, 1]"),
            Error::EmptyFilter => write!(f, "model requires n >= 1 stored elements"),
            Error::EmptyStoredSet => write!(f, "stored element set is empty"),
            Error::Oversized(msg) => write!(f, "instance too large for the oracle: {msg}"),
            Error::Format(msg) => write!(f, "malformed filter file: {msg}"),
            Error::Config(msg) => write!(f, "invalid experiment config: {msg}"),
        }
    }
}

impl std::error::Error for Error {}
