use std::time::{Duration, Instant};

use crate::tabular::{split_train_valid, Dataset, DEFAULT_VALID_FRACTION};

use super::learners::{fit_predict_model_step, FittedModel};
use super::spec::{StepKind, StepSpec};
use super::surrogate::{surrogate_score, SurrogateConfig};
use super::transform::{apply_data_step, coerce_numeric, is_model_ready};
use super::Result;

/// What a step leaves behind besides its score.
#[derive(Debug, Clone, PartialEq)]
pub enum StepProduct {
    Data(Dataset),
    Model(FittedModel),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub acc: f64,
    pub product: StepProduct,
    pub elapsed: Duration,
}

impl StepOutcome {
    pub fn transformed(&self) -> Option<&Dataset> {
        match &self.product {
            StepProduct::Data(d) => Some(d),
            StepProduct::Model(_) => None,
        }
    }

    pub fn fitted_model(&self) -> Option<&FittedModel> {
        match &self.product {
            StepProduct::Model(m) => Some(m),
            StepProduct::Data(_) => None,
        }
    }

    pub fn into_transformed(self) -> Option<Dataset> {
        match self.product {
            StepProduct::Data(d) => Some(d),
            StepProduct::Model(_) => None,
        }
    }
}

/// Runs one step on `x` and scores it.
///
/// A data step transforms `x` and the surrogate scores the result. Output
/// that is not yet model-ready (categorical columns or missing cells left)
/// is scored through a coerced numeric view; the returned dataset is the
/// uncoerced transform. A model step trains on the 80/20 split of `x` drawn
/// with `seed` and reports validation accuracy.
pub fn evaluate_step(s: &StepSpec, x: &Dataset, cfg: &SurrogateConfig, seed: u64) -> Result<StepOutcome> {
    let start = Instant::now();
    let (acc, product) = match s.kind() {
        StepKind::DataStep => {
            let out = apply_data_step(s, x)?;
            let acc = if is_model_ready(&out) {
                surrogate_score(&out, cfg, seed)?
            } else {
                surrogate_score(&coerce_numeric(&out), cfg, seed)?
            };
            (acc, StepProduct::Data(out))
        }
        StepKind::ModelStep => {
            let split = split_train_valid(x, DEFAULT_VALID_FRACTION, seed)?;
            let (acc, model) = fit_predict_model_step(s, &split, seed)?;
            (acc, StepProduct::Model(model))
        }
    };
    Ok(StepOutcome { acc, product, elapsed: start.elapsed() })
}
