use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::matrix::{argmax_count, Matrix};
use super::tree::{DecisionTree, TreeParams};

/// Bagged trees with per-node feature subsampling (`round(sqrt(features))`).
#[derive(Debug, Clone, PartialEq)]
pub struct RandomForest {
    trees: Vec<DecisionTree>,
    n_classes: usize,
}

impl RandomForest {
    pub fn fit(x: &Matrix, y: &[usize], n_classes: usize, n_trees: usize, max_depth: usize, rng: &mut ChaCha8Rng) -> Self {
        let n = x.rows();
        let mtry = ((x.cols() as f64).sqrt().round() as usize).max(1);
        let params = TreeParams { max_depth, min_leaf: 1, max_features: Some(mtry) };
        let trees = (0..n_trees)
            .map(|_| {
                let rows: Vec<usize> = (0..n).map(|_| rng.gen_range(0..n)).collect();
                DecisionTree::fit(x, y, n_classes, &rows, params, Some(&mut *rng))
            })
            .collect();
        RandomForest { trees, n_classes }
    }

    /// Majority vote; ties go to the lowest class index.
    pub fn predict_row(&self, row: &[f64]) -> usize {
        let mut votes = vec![0usize; self.n_classes];
        for t in &self.trees {
            votes[t.predict_row(row)] += 1;
        }
        argmax_count(&votes)
    }
}
