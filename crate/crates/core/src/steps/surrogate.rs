use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::tabular::{accuracy, split_train_valid, Dataset, DEFAULT_VALID_FRACTION};

use super::learners::{encode_labels, DecisionTree, Matrix, TreeParams};
use super::{Result, StepError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitCriterion {
    Gini,
}

/// Settings of the fixed tree that scores intermediate data. Chosen once per
/// run and never tuned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurrogateConfig {
    pub max_depth: usize,
    pub min_leaf: usize,
    pub split_criterion: SplitCriterion,
}

impl Default for SurrogateConfig {
    fn default() -> Self {
        SurrogateConfig { max_depth: 6, min_leaf: 5, split_criterion: SplitCriterion::Gini }
    }
}

impl SurrogateConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_depth == 0 || self.min_leaf == 0 {
            return Err(StepError::InvalidSurrogate);
        }
        Ok(())
    }
}

/// Validation accuracy of the surrogate tree on the stratified 80/20 split
/// of `x` drawn with `split_seed`.
pub fn surrogate_score(x: &Dataset, cfg: &SurrogateConfig, split_seed: u64) -> Result<f64> {
    cfg.validate()?;
    // surface input problems before splitting
    Matrix::from_dataset(x)?;
    if x.n_classes() < 2 {
        return Err(StepError::SingleClass);
    }
    let split = split_train_valid(x, DEFAULT_VALID_FRACTION, split_seed)?;
    let train = Matrix::from_dataset(&split.train)?;
    let (classes, y) = encode_labels(split.train.labels());
    let rows: Vec<usize> = (0..train.rows()).collect();
    let params = TreeParams { max_depth: cfg.max_depth, min_leaf: cfg.min_leaf, max_features: None };
    let tree = DecisionTree::fit::<ChaCha8Rng>(&train, &y, classes.len(), &rows, params, None);
    let valid = Matrix::from_dataset(&split.valid)?;
    let predicted: Vec<&str> = (0..valid.rows()).map(|r| classes[tree.predict_row(valid.row(r))].as_str()).collect();
    Ok(accuracy(&predicted, split.valid.labels())?)
}
