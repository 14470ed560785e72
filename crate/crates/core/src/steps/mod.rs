//! Pipeline steps: the catalog, data transforms, learners behind model
//! steps, the fixed surrogate tree, and single-step evaluation.

mod evaluate;
pub mod learners;
mod spec;
mod surrogate;
mod transform;

pub use evaluate::{evaluate_step, StepOutcome, StepProduct};
pub use learners::{fit_model, fit_predict_model_step, model_op, FittedModel};
pub use spec::{
    catalog, catalog_entry, CatalogEntry, DataOp, EncodeKind, ImputeStrategy, ModelOp, ParamDecl, ParamDomain,
    ParamValue, ScaleKind, SelectMethod, StepKind, StepOp, StepSpec,
};
pub use surrogate::{surrogate_score, SplitCriterion, SurrogateConfig};
pub use transform::{
    apply_data_step, coerce_numeric, fit_data_step, is_model_ready, FittedTransform, UNSEEN_ORDINAL, ZERO_TOKEN,
};

use thiserror::Error;

use crate::tabular::TabularError;

#[derive(Debug, Error)]
pub enum StepError {
    #[error("unknown step `{0}`")]
    UnknownStep(String),
    #[error("step `{step}` has no parameter `{param}`")]
    UnknownParam { step: String, param: String },
    #[error("step `{step}` is missing parameter `{param}`")]
    MissingParam { step: String, param: String },
    #[error("step `{step}`: parameter `{param}` value {value} is outside its declared range")]
    ParamOutOfRange { step: String, param: String, value: String },
    #[error("cannot parse step `{0}`")]
    Parse(String),
    #[error("`{step}` is not a {expected}")]
    WrongKind { step: String, expected: &'static str },
    #[error("select k={k} exceeds the {features} available feature columns")]
    SelectTooLarge { k: usize, features: usize },
    #[error("column `{column}` has missing cells (pipeline skipped imputation)")]
    MissingValues { column: String },
    #[error("column `{column}` is categorical (pipeline skipped encoding)")]
    CategoricalInput { column: String },
    #[error("training data holds a single class")]
    SingleClass,
    #[error("input columns differ from the ones the step was fitted on")]
    SchemaMismatch,
    #[error("surrogate max_depth and min_leaf must be at least 1")]
    InvalidSurrogate,
    #[error(transparent)]
    Tabular(#[from] TabularError),
}

pub type Result<T, E = StepError> = std::result::Result<T, E>;
