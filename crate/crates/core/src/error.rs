use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("value {value} at row {row}, column {column} lies outside [-{r}, {r}]")]
    OutOfDomain {
        row: usize,
        column: usize,
        value: f64,
        r: f64,
    },

    #[error("coordinate {axis} = {value} lies outside [-{r}, {r}]")]
    PointOutOfDomain { axis: usize, value: f64, r: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid dimension d = {d}: {reason}")]
    InvalidDimension { d: usize, reason: &'static str },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("grid with m = {m}, d = {d} exceeds the cell-count limit of {limit}")]
    Overflow { m: usize, d: usize, limit: usize },

    #[error("dataset bounds do not match grid bounds")]
    BoundsMismatch,

    #[error("histogram has already been privatized (epsilon {epsilon} spent)")]
    AlreadyPrivatized { epsilon: f64 },

    #[error("no sign change of xi found below m = {hi}")]
    BracketFailure { hi: f64 },

    #[error("all weights are non-positive after clamping")]
    AllWeightsNonPositive,

    #[error("K = {k} exceeds the number of distinct points M = {m}")]
    KExceedsDistinctPoints { k: usize, m: usize },

    #[error("K = {k} exceeds the number of points N = {n}")]
    KExceedsN { k: usize, n: usize },

    #[error("cluster centers are {min_distance} apart, need at least {required}")]
    InsufficientSeparation { min_distance: f64, required: f64 },

    #[error("could not draw an in-domain point after {attempts} attempts")]
    RejectionExhausted { attempts: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
