use std::path::PathBuf;

/// Errors produced by `pathlens`.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed CSV at row {row}: {message}")]
    Csv { row: usize, message: String },

    #[error("row {row}, column {column:?}: cannot parse {value:?} as a finite number")]
    ParseCell {
        row: usize,
        column: String,
        value: String,
    },

    #[error("input contains no data rows")]
    Empty,

    #[error("column {0:?} not found")]
    MissingColumn(String),

    #[error("duplicate column name {0:?}")]
    DuplicateColumn(String),

    #[error("column {0:?} has zero variance")]
    ZeroVariance(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("gram matrix is not symmetric")]
    NotSymmetric,

    #[error("gram matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:e})")]
    Indefinite { min_eigenvalue: f64 },

    #[error("negative target second moment {0}")]
    NegativeSecondMoment(f64),

    #[error("coordinate index {index} out of range for {dim} features")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("unknown feature {0:?}")]
    UnknownFeature(String),

    #[error("invalid weight schedule: {0}")]
    InvalidSchedule(String),

    #[error("every diagonal entry of the gram matrix is numerically zero")]
    DegenerateGram,

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error(
        "exact search exceeded its budget of {budget} inner solves; \
         use the local improvement heuristic instead"
    )]
    BudgetExceeded { budget: u64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
