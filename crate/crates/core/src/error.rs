use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("column `{0}` not found in header")]
    MissingColumn(String),
    #[error("no usable rows remain after dropping records with missing values")]
    EmptyDataset,
    #[error("classification target must be 0 or 1, found `{value}` on data row {row}")]
    BadLabel { row: usize, value: String },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("need at least 2 rows to partition, found {0}")]
    TooFewRows(usize),
    #[error("split side is empty")]
    EmptySide,
    #[error("labels must be 0 or 1 for the Gini criterion")]
    NonBinary,
    #[error("no valid split: all projected values are equal")]
    NoValidSplit,
    #[error("leaf budget {budget} exceeds the {n} training samples")]
    BudgetExceedsData { budget: usize, n: usize },
    #[error("leaf count {tau} is outside 1..={leaves}")]
    BadTau { tau: usize, leaves: usize },
    #[error("operation requires a classification model")]
    WrongTask,
    #[error("relative prediction error is undefined: test targets all equal the training mean")]
    ZeroDenominator,
    #[error("length mismatch: {0} predictions vs {1} labels")]
    LengthMismatch(usize, usize),
    #[error("invalid synthetic target: {0}")]
    BadSpec(String),
    #[error("invalid configuration: {0}")]
    BadConfig(String),
    #[error("model format version {found} is not supported (expected {expected})")]
    VersionMismatch { expected: u32, found: u32 },
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
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

    /// True for failures caused by the input data rather than by the caller's
    /// configuration or by a broken internal invariant.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::MissingColumn(_)
                | Error::EmptyDataset
                | Error::BadLabel { .. }
                | Error::DimensionMismatch { .. }
                | Error::TooFewRows(_)
                | Error::ZeroDenominator
                | Error::VersionMismatch { .. }
                | Error::SchemaMismatch(_)
                | Error::Io { .. }
                | Error::Csv(_)
                | Error::Json(_)
        )
    }
}
