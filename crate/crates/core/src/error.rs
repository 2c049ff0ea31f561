use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty matrix")]
    EmptyMatrix,
    #[error("ragged matrix: row {row} has {found} entries, expected {expected}")]
    Ragged {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("invalid probability {value} at (x={x}, z={z})")]
    InvalidEntry { x: usize, z: usize, value: f64 },
    #[error("probabilities sum to {sum}, expected 1 within {tolerance}")]
    NotNormalized { sum: f64, tolerance: f64 },
    #[error("index sets differ in size: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("enumerating {cells} joint outcomes exceeds the threshold of {threshold}")]
    ThresholdExceeded { cells: u128, threshold: u64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("side-information symbol {symbol} at coordinate {coord} has zero probability")]
    ZeroSideInformation { coord: usize, symbol: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("cannot parse source `{0}`")]
    Parse(String),
    #[error("size limit exceeded: {0}")]
    SizeLimit(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
