use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::matrix::Matrix;

/// One-vs-rest logistic regression trained by full-batch gradient descent.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticRegression {
    /// One weight vector per class, bias last.
    weights: Vec<Vec<f64>>,
}

const INIT_SCALE: f64 = 0.01;

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn score(w: &[f64], row: &[f64]) -> f64 {
    let (bias, coef) = w.split_last().expect("bias present");
    coef.iter().zip(row).map(|(a, b)| a * b).sum::<f64>() + bias
}

impl LogisticRegression {
    pub fn fit(
        x: &Matrix,
        y: &[usize],
        n_classes: usize,
        lr: f64,
        epochs: usize,
        l2: f64,
        rng: &mut ChaCha8Rng,
    ) -> Self {
        let (n, f) = (x.rows(), x.cols());
        let mut weights = Vec::with_capacity(n_classes);
        let mut grad = vec![0.0; f + 1];
        for class in 0..n_classes {
            let mut w: Vec<f64> = (0..=f).map(|_| rng.gen_range(-INIT_SCALE..INIT_SCALE)).collect();
            for _ in 0..epochs {
                grad.iter_mut().for_each(|g| *g = 0.0);
                for r in 0..n {
                    let row = x.row(r);
                    let target = if y[r] == class { 1.0 } else { 0.0 };
                    let err = sigmoid(score(&w, row)) - target;
                    for (g, v) in grad.iter_mut().zip(row) {
                        *g += err * v;
                    }
                    grad[f] += err;
                }
                for j in 0..=f {
                    let penalty = if j < f { l2 * w[j] } else { 0.0 };
                    w[j] -= lr * (grad[j] / n as f64 + penalty);
                }
            }
            weights.push(w);
        }
        LogisticRegression { weights }
    }

    /// Class with the highest linear score; ties go to the lowest index.
    pub fn predict_row(&self, row: &[f64]) -> usize {
        let mut best = (0, f64::NEG_INFINITY);
        for (c, w) in self.weights.iter().enumerate() {
            let s = score(w, row);
            if s > best.1 {
                best = (c, s);
            }
        }
        best.0
    }
}
