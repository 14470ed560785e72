//! Tabular datasets: CSV ingestion, class-aware sampling, splitting and
//! accuracy.

mod csv_io;
mod dataset;
mod metrics;
mod sampling;

pub use csv_io::{infer_kind, load_csv, read_csv, SchemaHints, NUMERIC_THRESHOLD};
pub use dataset::{Cell, Column, ColumnKind, Dataset};
pub use metrics::accuracy;
pub use sampling::{
    apportion, choose_prefix, seeded_rng, split_indices, split_train_valid, stratified_sample, SplitPair,
    DEFAULT_VALID_FRACTION,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TabularError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("target column `{0}` not found in header")]
    MissingTarget(String),
    #[error("row {row} has an empty label")]
    EmptyLabel { row: usize },
    #[error("dataset has no data rows")]
    NoRows,
    #[error("need at least 2 distinct classes, found {0}")]
    TooFewClasses(usize),
    #[error("row {row} has {found} cells, expected {expected}")]
    RowWidth { row: usize, expected: usize, found: usize },
    #[error("{cells} cells do not fill {rows} rows of width {width}")]
    Shape { rows: usize, width: usize, cells: usize },
    #[error("cell in row {row}, column `{column}` does not match the column kind or is not finite")]
    BadCell { row: usize, column: String },
    #[error("sample size {requested} is smaller than the number of classes ({classes})")]
    SampleTooSmall { requested: usize, classes: usize },
    #[error("validation fraction {0} is outside (0, 1)")]
    InvalidFraction(f64),
    #[error("fraction {fraction} of {rows} rows leaves a split part empty")]
    EmptySplitPart { rows: usize, fraction: f64 },
    #[error("train and validation schemas differ")]
    SchemaMismatch,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("empty input")]
    Empty,
}

pub type Result<T, E = TabularError> = std::result::Result<T, E>;
