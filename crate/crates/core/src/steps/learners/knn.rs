use super::matrix::{argmax_count, Matrix};

/// Euclidean k-nearest-neighbours. Equal distances favour the lower training
/// row index; tied votes favour the lower class index.
#[derive(Debug, Clone, PartialEq)]
pub struct Knn {
    train: Matrix,
    y: Vec<usize>,
    n_classes: usize,
    k: usize,
}

impl Knn {
    pub fn fit(x: &Matrix, y: &[usize], n_classes: usize, k: usize) -> Self {
        Knn { train: x.clone(), y: y.to_vec(), n_classes, k: k.min(x.rows()).max(1) }
    }

    pub fn predict_row(&self, row: &[f64]) -> usize {
        let mut dist: Vec<(f64, usize)> = (0..self.train.rows())
            .map(|r| {
                let d = self.train.row(r).iter().zip(row).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
                (d, r)
            })
            .collect();
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if self.k < dist.len() {
            dist.select_nth_unstable_by(self.k - 1, cmp);
        }
        let mut votes = vec![0usize; self.n_classes];
        for &(_, r) in &dist[..self.k] {
            votes[self.y[r]] += 1;
        }
        argmax_count(&votes)
    }
}
