//! CART classification tree with Gini impurity.
//!
//! Candidate splits are compared exactly: minimising weighted Gini impurity
//! is the same as maximising `sum(l_c^2)/n_l + sum(r_c^2)/n_r`, a ratio of
//! integers, so two splits are compared by cross-multiplication in `u128`.
//! Features are scanned in ascending index order and thresholds in ascending
//! value order, and only a strictly better split replaces the incumbent, so
//! ties resolve to the lowest feature index and then the lowest threshold.

use rand::Rng;

use crate::tabular::choose_prefix;

use super::matrix::{argmax_count, Matrix};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_leaf: usize,
    /// Features examined per node; `None` examines all of them.
    pub max_features: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Leaf(usize),
    Split { feature: usize, threshold: f64, left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    nodes: Vec<Node>,
}

/// `num / den` with both parts non-negative.
#[derive(Debug, Clone, Copy)]
struct Ratio {
    num: u128,
    den: u128,
}

impl Ratio {
    fn gt(self, other: Ratio) -> bool {
        self.num * other.den > other.num * self.den
    }
}

struct Split {
    feature: usize,
    threshold: f64,
    score: Ratio,
}

struct Builder<'a, R> {
    x: &'a Matrix,
    y: &'a [usize],
    n_classes: usize,
    params: TreeParams,
    rng: Option<&'a mut R>,
    nodes: Vec<Node>,
}

impl DecisionTree {
    /// Grows a tree on `rows` of `x` (duplicates allowed, as in a bootstrap).
    /// `rng` is only consulted when `params.max_features` is set.
    pub fn fit<R: Rng>(
        x: &Matrix,
        y: &[usize],
        n_classes: usize,
        rows: &[usize],
        params: TreeParams,
        rng: Option<&mut R>,
    ) -> Self {
        let mut b = Builder { x, y, n_classes, params, rng, nodes: Vec::new() };
        let mut rows = rows.to_vec();
        b.grow(&mut rows, 0);
        DecisionTree { nodes: b.nodes }
    }

    pub fn predict_row(&self, row: &[f64]) -> usize {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf(c) => return *c,
                Node::Split { feature, threshold, left, right } => {
                    i = if row[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

impl<R: Rng> Builder<'_, R> {
    fn grow(&mut self, rows: &mut [usize], depth: usize) -> usize {
        let mut counts = vec![0usize; self.n_classes];
        for &r in rows.iter() {
            counts[self.y[r]] += 1;
        }
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf(argmax_count(&counts)));

        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        if pure || depth >= self.params.max_depth || rows.len() < 2 * self.params.min_leaf {
            return id;
        }
        let Some(split) = self.best_split(rows, &counts) else {
            return id;
        };
        let (f, t) = (split.feature, split.threshold);
        rows.sort_by(|&a, &b| (self.x.get(a, f) > t).cmp(&(self.x.get(b, f) > t)).then(a.cmp(&b)));
        let n_left = rows.iter().take_while(|&&r| self.x.get(r, f) <= t).count();
        let (l, r) = rows.split_at_mut(n_left);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[id] = Node::Split { feature: f, threshold: t, left, right };
        id
    }

    fn candidate_features(&mut self) -> Vec<usize> {
        let n = self.x.cols();
        let mut all: Vec<usize> = (0..n).collect();
        match (self.params.max_features, self.rng.as_deref_mut()) {
            (Some(m), Some(rng)) if m < n => {
                let mut picked = choose_prefix(&mut all, m, rng).to_vec();
                picked.sort_unstable();
                picked
            }
            _ => all,
        }
    }

    fn best_split(&mut self, rows: &[usize], counts: &[usize]) -> Option<Split> {
        let n = rows.len();
        let parent_sq: u128 = counts.iter().map(|&c| (c * c) as u128).sum();
        let parent = Ratio { num: parent_sq, den: n as u128 };
        let min_leaf = self.params.min_leaf;
        let mut best: Option<Split> = None;
        let mut sorted = rows.to_vec();

        for f in self.candidate_features() {
            sorted.sort_by(|&a, &b| self.x.get(a, f).total_cmp(&self.x.get(b, f)).then(a.cmp(&b)));
            let mut left = vec![0usize; self.n_classes];
            let mut right = counts.to_vec();
            let (mut left_sq, mut right_sq) = (0u128, parent_sq);
            for i in 0..n - 1 {
                let c = self.y[sorted[i]];
                left_sq += 2 * left[c] as u128 + 1;
                left[c] += 1;
                right_sq -= 2 * right[c] as u128 - 1;
                right[c] -= 1;

                let (nl, nr) = (i + 1, n - i - 1);
                if nr < min_leaf {
                    break;
                }
                if nl < min_leaf {
                    continue;
                }
                let (lo, hi) = (self.x.get(sorted[i], f), self.x.get(sorted[i + 1], f));
                if lo == hi {
                    continue;
                }
                let score = Ratio {
                    num: left_sq * nr as u128 + right_sq * nl as u128,
                    den: (nl * nr) as u128,
                };
                if !score.gt(parent) || best.as_ref().is_some_and(|b| !score.gt(b.score)) {
                    continue;
                }
                let mid = lo + (hi - lo) / 2.0;
                let threshold = if mid >= lo && mid < hi { mid } else { lo };
                best = Some(Split { feature: f, threshold, score });
            }
        }
        best
    }
}
