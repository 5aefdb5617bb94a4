//! Typed errors for the whole library.
//!
//! Errors fall into two families: *domain* errors (the caller handed us
//! something invalid — a probability outside `[0, 1]`, an unknown friend id,
//! an undersized image) and *input* errors (a file that does not parse, with
//! the path and line that failed). Internal invariant violations are bugs and
//! panic instead of returning a variant.

use std::path::PathBuf;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong in the library short of an internal bug.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A numeric argument that must be a probability was outside `[0, 1]`.
    #[error("{name} must lie in [0, 1], got {value}")]
    ProbabilityOutOfRange { name: &'static str, value: f64 },

    /// A search instance failed validation.
    #[error("invalid search instance: {0}")]
    InvalidInstance(String),

    /// A friend id that does not exist in the instance.
    #[error("unknown friend id {0}")]
    UnknownFriend(u64),

    /// A per-friend operation that requires unqueried pages was applied to a
    /// friend whose pages are all used up.
    #[error("friend {0} is already exhausted")]
    FriendExhausted(u64),

    /// A policy that does not query every friend exactly its page count.
    #[error("invalid policy: {0}")]
    InvalidPolicy(String),

    /// A ground-truth assignment inconsistent with the instance.
    #[error("invalid ground truth: {0}")]
    InvalidGroundTruth(String),

    /// Exhaustive policy enumeration was asked for on too large an instance.
    #[error("brute force requires at most {cap} total queries, instance has {total}")]
    BruteForceCapExceeded { total: u64, cap: u64 },

    /// An image too small to fingerprint.
    #[error("image must be at least 8x8 pixels, got {width}x{height}")]
    ImageTooSmall { width: u32, height: u32 },

    /// A raster constructed with inconsistent dimensions.
    #[error("invalid raster: {0}")]
    InvalidRaster(String),

    /// A dataset or feature matrix that fails validation.
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    /// A caller-supplied argument outside its documented domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// All-pairs comparison refused because the profile count exceeds the cap
    /// and blocking was not enabled.
    #[error("{count} profiles exceed the all-pairs cap of {cap}; enable blocking or raise the cap")]
    TooManyProfiles { count: usize, cap: usize },

    /// A structured input file that failed to parse, with location.
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// A model file whose format or tags this build does not understand.
    #[error("unsupported model file: {0}")]
    UnsupportedModel(String),

    /// A report value that the chosen serialization cannot represent.
    #[error("unserializable value: {0}")]
    Unserializable(String),

    /// Underlying I/O failure, annotated with the path involved.
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// JSON (de)serialization failure outside the line-oriented readers.
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    /// CSV (de)serialization failure.
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    /// Attach a path to an `io::Error`.
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Build a parse error pointing at a 1-based line of `path`.
    pub fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
