//! Error type shared by all modules.

use thiserror::Error;

/// Errors returned by the simulator and detector.
#[derive(Debug, Error)]
pub enum Error {
    /// Pulse parameters out of range.
    #[error("invalid pulse parameters: {0}")]
    InvalidPulse(String),
    /// The acceleration factor violates the equivalent-model condition `tau < 1/(1 + rolloff)`.
    #[error("equivalent FTN model invalid: tau = {tau} must be below 1/(1 + {rolloff}) = {limit}")]
    ModelValidity { tau: f64, rolloff: f64, limit: f64 },
    /// A tap count or window length must be odd.
    #[error("{what} must be odd, got {value}")]
    NotOdd { what: &'static str, value: usize },
    /// A value is outside its admissible range.
    #[error("{0}")]
    OutOfRange(String),
    /// Vector dimensions do not agree.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    /// Enumeration would exceed the configured size cap.
    #[error("enumeration of 2^{bits} entries exceeds the cap of 2^{cap}")]
    TooLarge { bits: usize, cap: usize },
    /// A symbol is not +1 or -1.
    #[error("symbol at index {0} is not +1 or -1")]
    InvalidSymbol(usize),
    /// Only one class is present where two are needed.
    #[error("codebook contains a single class")]
    SingleClass,
    /// Codebook cache file is malformed.
    #[error("codebook cache: {0}")]
    Cache(String),
    /// Configuration error.
    #[error("config: {0}")]
    Config(String),
    /// I/O error.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Result alias.
pub type Result<T> = std::result::Result<T, Error>;
