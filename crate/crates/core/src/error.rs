//! Error type shared across the crate.

/// Errors produced by filter updates, bound evaluators and the harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A vector or matrix dimension does not match the filter state.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    /// A parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A closed-form expression was evaluated outside its hypotheses.
    #[error("domain error: {0}")]
    Domain(String),

    /// A factorization or recursion lost numerical validity.
    #[error("numerical breakdown: {0}")]
    Numerical(String),

    /// A metric is undefined for the given inputs (e.g. zero-norm channel).
    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    /// Invalid run or algorithm configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// Malformed input file (WAV decoding).
    #[error("format error at byte {offset}: {message}")]
    Format { offset: u64, message: String },

    /// Underlying I/O failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
