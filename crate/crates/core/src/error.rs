use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}: dataset has no data rows")]
    EmptyDataset(String),

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("row {row}, column `{column}`: cannot parse {value:?}")]
    Parse {
        row: usize,
        column: String,
        value: String,
    },

    #[error("column `{column}` has {count} distinct categories (limit {limit})")]
    Cardinality {
        column: String,
        count: usize,
        limit: usize,
    },

    #[error("cannot stratify: {0}")]
    Stratification(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("shape mismatch: expected {expected} columns, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("labels contain a single class; both 0 and 1 are required")]
    SingleClass,

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error(
        "coordinate descent did not converge after {sweeps} sweeps \
         (lambda {lambda:e}, last max coefficient change {max_delta:e}, {nonzero} nonzero)"
    )]
    LassoNonConvergence {
        sweeps: usize,
        lambda: f64,
        max_delta: f64,
        nonzero: usize,
    },

    #[error("base estimator failed with surviving features {features:?}: {source}")]
    Elimination {
        features: Vec<usize>,
        #[source]
        source: Box<Error>,
    },

    #[error("record is missing feature `{0}`")]
    MissingFeature(String),

    #[error("unknown category {value:?} for feature `{feature}`")]
    UnknownCategory { feature: String, value: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of the numerical routines themselves, as opposed to
    /// bad input or I/O.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::NonFinite(_) | Error::LassoNonConvergence { .. } => true,
            Error::Elimination { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
