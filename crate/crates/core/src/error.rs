use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("point {index} has dimension {found}, expected {expected}")]
    RaggedDimensions {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("points have zero dimensions")]
    ZeroDimensions,
    #[error("point {index} has a non-finite coordinate")]
    NonFinite { index: usize },
    #[error("{points} points but {labels} group labels")]
    LabelCountMismatch { points: usize, labels: usize },
    #[error("tau[{group}] = {value} is outside [0, 1/k = {max}]")]
    TauOutOfRange { group: usize, value: f64, max: f64 },
    #[error("expected {expected} values, got {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("cluster count k must be at least 1")]
    ZeroClusters,
    #[error("{n} points cannot fill {k} clusters")]
    TooFewPoints { n: usize, k: usize },
    #[error("group {group}: quota {quota} x {k} clusters exceeds {available} points")]
    InfeasibleQuota {
        group: usize,
        quota: usize,
        k: usize,
        available: usize,
    },
    #[error("dataset balance needs at least two groups")]
    SingleGroup,
    #[error("instance exceeds oracle limits: {0}")]
    TooLarge(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("row {row}, column `{column}`: cannot parse `{value}` as a number")]
    NonNumericCell {
        row: usize,
        column: String,
        value: String,
    },
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("result table is empty")]
    EmptyTable,
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
