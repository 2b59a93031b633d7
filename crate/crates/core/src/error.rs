use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("p-value {0} outside (0, 1]")]
    PValueDomain(f64),

    #[error("invalid score parameters: {0}")]
    InvalidScoreParams(String),

    #[error("expected {expected} p-values, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("indices violate 0 <= s < t < u <= {limit}: ({s}, {t}, {u})")]
    IndexOrder { s: usize, t: usize, u: usize, limit: usize },

    #[error("sequence index {index} out of range for {n_sequences} sequences")]
    SequenceIndex { index: usize, n_sequences: usize },

    #[error("invalid segment [{b}, {e}] for series of length {length}")]
    SegmentBounds { b: usize, e: usize, length: usize },

    #[error("scale index {index} out of range (max {max})")]
    ScaleIndex { index: usize, max: usize },

    #[error("invalid panel: {0}")]
    InvalidPanel(String),

    #[error("row {row}: value {value} at column {col} is not a nonnegative integer count")]
    NonCount { row: usize, col: usize, value: f64 },

    #[error("row {0} is degenerate: median absolute adjacent difference is zero")]
    DegenerateRow(usize),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("significance level {alpha} unreachable on the calibration grid (min type-I error {min_error})")]
    Unreachable { alpha: f64, min_error: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),
}
