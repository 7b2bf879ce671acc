use std::path::PathBuf;

/// Errors produced by the pipeline and its file formats.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed file content (bad magic, unparseable header token, ...).
    #[error("{path}: {reason}")]
    Format { path: PathBuf, reason: String },

    /// Sample depth the toolkit does not handle (PGM maxval > 255).
    #[error("{path}: unsupported sample depth, maxval {maxval} exceeds 255")]
    UnsupportedDepth { path: PathBuf, maxval: u32 },

    /// File payload shorter or longer than its header declares.
    #[error("{path}: size mismatch, expected {expected} bytes of payload, found {actual}")]
    SizeMismatch {
        path: PathBuf,
        expected: usize,
        actual: usize,
    },

    #[error("dimension mismatch: {reason}")]
    DimensionMismatch { reason: String },

    #[error("invalid parameter: {reason}")]
    InvalidParameter { reason: String },

    /// A value fell outside its representable range (e.g. scaled disparity > 255).
    #[error("out of range: {reason}")]
    Range { reason: String },

    /// Inputs leave nothing to compute (e.g. no jointly valid pixels to evaluate).
    #[error("degenerate input: {reason}")]
    DegenerateInput { reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
