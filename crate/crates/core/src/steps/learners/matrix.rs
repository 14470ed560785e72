use crate::tabular::{Cell, ColumnKind, Dataset};

use super::super::{Result, StepError};

/// Dense row-major matrix of model inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// Fails on categorical columns or missing cells; learners never see
    /// either.
    pub fn from_dataset(d: &Dataset) -> Result<Self> {
        if let Some(col) = d.columns().iter().find(|c| c.kind == ColumnKind::Categorical) {
            return Err(StepError::CategoricalInput { column: col.name.clone() });
        }
        let cols = d.n_features();
        let mut data = Vec::with_capacity(d.cells().len());
        for (i, cell) in d.cells().iter().enumerate() {
            match cell {
                Cell::Num(v) => data.push(*v),
                _ => return Err(StepError::MissingValues { column: d.columns()[i % cols].name.clone() }),
            }
        }
        Ok(Matrix { rows: d.n_rows(), cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }
}

/// Sorted distinct class tokens and the per-row class index.
pub fn encode_labels(labels: &[String]) -> (Vec<String>, Vec<usize>) {
    let mut classes = labels.to_vec();
    classes.sort();
    classes.dedup();
    let y = labels.iter().map(|l| classes.binary_search(l).expect("label present")).collect();
    (classes, y)
}

/// Index of the largest count; the lowest index wins ties.
pub fn argmax_count(counts: &[usize]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best
}
