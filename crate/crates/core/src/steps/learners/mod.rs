//! From-scratch classifiers backing the model steps.

mod forest;
mod knn;
mod logreg;
mod matrix;
mod tree;

pub use forest::RandomForest;
pub use knn::Knn;
pub use logreg::LogisticRegression;
pub use matrix::{encode_labels, Matrix};
pub use tree::{DecisionTree, TreeParams};

use rand_chacha::ChaCha8Rng;

use crate::tabular::{accuracy, seeded_rng, Column, Dataset, SplitPair};

use super::spec::{ModelOp, StepOp, StepSpec};
use super::{Result, StepError};

#[derive(Debug, Clone, PartialEq)]
enum Learner {
    Tree(DecisionTree),
    Forest(RandomForest),
    LogReg(LogisticRegression),
    Knn(Knn),
}

/// A trained model. Immutable once built; safe to share read-only.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedModel {
    classes: Vec<String>,
    input: Vec<Column>,
    learner: Learner,
}

impl FittedModel {
    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn predict(&self, x: &Dataset) -> Result<Vec<String>> {
        if x.columns() != self.input.as_slice() {
            return Err(StepError::SchemaMismatch);
        }
        let m = Matrix::from_dataset(x)?;
        Ok((0..m.rows())
            .map(|r| {
                let row = m.row(r);
                let c = match &self.learner {
                    Learner::Tree(t) => t.predict_row(row),
                    Learner::Forest(f) => f.predict_row(row),
                    Learner::LogReg(l) => l.predict_row(row),
                    Learner::Knn(k) => k.predict_row(row),
                };
                self.classes[c].clone()
            })
            .collect())
    }
}

/// Trains the learner named by `op` on all rows of `train`.
pub fn fit_model(op: &ModelOp, train: &Dataset, seed: u64) -> Result<FittedModel> {
    let x = Matrix::from_dataset(train)?;
    let (classes, y) = encode_labels(train.labels());
    if classes.len() < 2 {
        return Err(StepError::SingleClass);
    }
    let k = classes.len();
    let mut rng: ChaCha8Rng = seeded_rng(seed);
    let all: Vec<usize> = (0..x.rows()).collect();
    let learner = match *op {
        ModelOp::DecisionTree { max_depth, min_leaf } => {
            let params = TreeParams { max_depth, min_leaf, max_features: None };
            Learner::Tree(DecisionTree::fit::<ChaCha8Rng>(&x, &y, k, &all, params, None))
        }
        ModelOp::RandomForest { n_trees, max_depth } => {
            Learner::Forest(RandomForest::fit(&x, &y, k, n_trees, max_depth, &mut rng))
        }
        ModelOp::LogisticRegression { lr, epochs, l2 } => {
            Learner::LogReg(LogisticRegression::fit(&x, &y, k, lr, epochs, l2, &mut rng))
        }
        ModelOp::Knn { k: neighbours } => Learner::Knn(Knn::fit(&x, &y, k, neighbours)),
    };
    Ok(FittedModel { classes, input: train.columns().to_vec(), learner })
}

pub fn model_op(step: &StepSpec) -> Result<ModelOp> {
    match step.op() {
        StepOp::Model(op) => Ok(op),
        StepOp::Data(_) => Err(StepError::WrongKind { step: step.canonical(), expected: "model step" }),
    }
}

/// Trains on `split.train` and returns accuracy on `split.valid`.
pub fn fit_predict_model_step(step: &StepSpec, split: &SplitPair, seed: u64) -> Result<(f64, FittedModel)> {
    let op = model_op(step)?;
    let model = fit_model(&op, &split.train, seed)?;
    let predicted = model.predict(&split.valid)?;
    let acc = accuracy(&predicted, split.valid.labels())?;
    Ok((acc, model))
}
