//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// All failure modes surfaced by the library.
///
/// The CLI maps these onto its exit-code contract: configuration and
/// argument problems are exit 2, I/O and malformed-data problems exit 3,
/// numeric failures exit 4.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed container or header while decoding.
    #[error("format error: {0}")]
    Format(String),

    /// Well-formed but outside the supported subset (compression, depth, ...).
    #[error("unsupported format: {0}")]
    Unsupported(String),

    /// An operation that needs data received none.
    #[error("empty input: {0}")]
    EmptyInput(String),

    /// Invalid argument combination at a library call site.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A value outside its documented domain.
    #[error("out of range: {0}")]
    Range(String),

    /// Configuration file problem, anchored to the offending line.
    #[error("config error (line {line}): {message}")]
    Config { line: usize, message: String },

    /// Non-finite data or a numerically failed computation.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Numeric failure inside the streaming pipeline, tagged with the block.
    #[error("numeric error in block {block}: {message}")]
    NumericAt { block: usize, message: String },

    /// Input data that is readable but inconsistent (e.g. mismatched lengths
    /// across channel files).
    #[error("data error: {0}")]
    Data(String),

    /// SNR measurement against an all-zero reference is undefined.
    #[error("undefined reference: clean signal has zero energy")]
    UndefinedReference,

    /// A learning curve never settles within the requested margin.
    #[error("no convergence: curve never stays within the margin above its floor")]
    NoConvergence,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(line: usize, message: impl Into<String>) -> Self {
        Error::Config {
            line,
            message: message.into(),
        }
    }
}
