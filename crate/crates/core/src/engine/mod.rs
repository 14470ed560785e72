//! History-guided pipeline search.
//!
//! A fraction of the pipelines is run in full to seed a History of prefix
//! accuracies. Every pipeline is then walked step by step: known prefixes are
//! reused, new ones are evaluated and recorded, and a pipeline stops as soon
//! as a step fails to beat the median accuracy in History.

mod cache;
mod history;
mod pipeline;
mod search;

pub use cache::{DataCache, DEFAULT_CACHE_BUDGET};
pub use history::{
    early_stop, early_stop_scoped, median_threshold, Decision, History, HistoryRecord, MedianScope, Origin,
};
pub use pipeline::{
    canonical_prefix, enumerate_pipelines, sample_pipelines, FittedPipeline, Pipeline, SearchSpace, PREFIX_SEPARATOR,
};
pub use search::{
    build_history, grid_search, search, select_winner, Executor, PipelineOutcome, PipelineStatus, RunStats,
    SearchConfig, SearchMode, SearchResult, Walk, Winner, DEFAULT_PIPELINE_FRACTION, DEFAULT_SAMPLE_SIZE,
};

use crate::steps::StepError;
use crate::tabular::TabularError;

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error("invalid search space: {0}")]
    InvalidSpace(String),
    #[error("invalid pipeline: {0}")]
    InvalidPipeline(String),
    #[error("pipeline fraction must be in (0, 1], got {0}")]
    InvalidFraction(f64),
    #[error("invalid search configuration: {0}")]
    InvalidConfig(String),
    #[error("accuracy {0} outside [0, 1]")]
    InvalidAccuracy(f64),
    #[error("history already holds {0}")]
    DuplicateKey(String),
    #[error("median of an empty history")]
    EmptyHistory,
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Step(#[from] StepError),
    #[error(transparent)]
    Tabular(#[from] TabularError),
}

pub type Result<T, E = EngineError> = std::result::Result<T, E>;
