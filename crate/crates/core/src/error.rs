use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("a dissimilarity needs at least one element")]
    Empty,

    #[error("entry ({row}, {col}) is not finite")]
    NotFinite { row: usize, col: usize },

    #[error("entry ({row}, {col}) is negative: {value}")]
    Negative { row: usize, col: usize, value: f64 },

    #[error("diagonal entry {index} is not zero: {value}")]
    NonZeroDiagonal { index: usize, value: f64 },

    #[error("matrix is not symmetric at ({row}, {col}): {upper} vs {lower}")]
    NotSymmetric {
        row: usize,
        col: usize,
        upper: f64,
        lower: f64,
    },

    #[error("not a permutation of 0..{n}: {reason}")]
    InvalidOrder { n: usize, reason: String },

    #[error("brute force is limited to {max} elements, got {n}")]
    TooLarge { n: usize, max: usize },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
