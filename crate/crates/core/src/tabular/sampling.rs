//! Class-aware sampling and train/validation splitting.
//!
//! Both operations apportion integer row counts across classes with the
//! largest-remainder method: every class first receives the floor of its exact
//! quota, then leftover units go to the largest fractional remainders. Ties on
//! the remainder favour the lexicographically smaller class token. Remainders
//! are compared as exact integers, never as floats.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dataset::Dataset;
use super::{Result, TabularError};

/// Fraction of the sampled data held out for validation when scoring steps.
pub const DEFAULT_VALID_FRACTION: f64 = 0.2;

/// The seeded generator used everywhere a step needs randomness.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Apportions `total` units over classes with sizes `counts` (in class-token
/// order). With `floor_one`, every class whose cap allows it receives at least
/// one unit. `caps` bounds each class from above. Returns `None` when the caps
/// cannot absorb `total`.
pub fn apportion(counts: &[usize], total: usize, floor_one: bool, caps: &[usize]) -> Option<Vec<usize>> {
    debug_assert_eq!(counts.len(), caps.len());
    let population: u128 = counts.iter().map(|&c| c as u128).sum();
    if population == 0 {
        return if total == 0 { Some(vec![0; counts.len()]) } else { None };
    }
    let mut alloc = Vec::with_capacity(counts.len());
    let mut rems = Vec::with_capacity(counts.len());
    let mut bumped = vec![false; counts.len()];
    for (i, (&c, &cap)) in counts.iter().zip(caps).enumerate() {
        let num = total as u128 * c as u128;
        let mut a = (num / population) as usize;
        rems.push(num % population);
        if floor_one && a == 0 && cap >= 1 {
            a = 1;
            bumped[i] = true;
        }
        alloc.push(a.min(cap));
    }

    let assigned: usize = alloc.iter().sum();
    if assigned < total {
        let mut order: Vec<usize> = (0..counts.len()).filter(|&i| !bumped[i]).collect();
        order.sort_by(|&a, &b| rems[b].cmp(&rems[a]).then(a.cmp(&b)));
        let mut leftover = total - assigned;
        while leftover > 0 {
            let mut progressed = false;
            for &i in &order {
                if leftover == 0 {
                    break;
                }
                if alloc[i] < caps[i] {
                    alloc[i] += 1;
                    leftover -= 1;
                    progressed = true;
                }
            }
            if !progressed {
                return None;
            }
        }
    } else if assigned > total {
        // Only the mandatory floor can overshoot; take units back from the
        // classes furthest above their quota.
        let floor = if floor_one { 1 } else { 0 };
        let mut order: Vec<usize> = (0..counts.len()).filter(|&i| !bumped[i]).collect();
        order.sort_by(|&a, &b| rems[a].cmp(&rems[b]).then(b.cmp(&a)));
        let mut excess = assigned - total;
        while excess > 0 {
            let mut progressed = false;
            for &i in &order {
                if excess == 0 {
                    break;
                }
                if alloc[i] > floor {
                    alloc[i] -= 1;
                    excess -= 1;
                    progressed = true;
                }
            }
            if !progressed {
                return None;
            }
        }
    }
    Some(alloc)
}

/// Row indices grouped by class token, classes in lexicographic order.
fn rows_by_class(d: &Dataset) -> BTreeMap<&str, Vec<usize>> {
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, l) in d.labels().iter().enumerate() {
        groups.entry(l.as_str()).or_default().push(i);
    }
    groups
}

/// Moves a uniformly random `k`-subset of `items` to its front (partial
/// Fisher-Yates) and returns that prefix.
pub fn choose_prefix<'a, T, R: Rng>(items: &'a mut [T], k: usize, rng: &mut R) -> &'a [T] {
    let n = items.len();
    for i in 0..k.min(n) {
        let j = rng.gen_range(i..n);
        items.swap(i, j);
    }
    &items[..k.min(n)]
}

/// Draws `n` rows preserving the class distribution as closely as integers
/// allow. Returns `d` unchanged when `n` exceeds its size.
pub fn stratified_sample(d: &Dataset, n: usize, seed: u64) -> Result<Dataset> {
    let groups = rows_by_class(d);
    if n < groups.len() {
        return Err(TabularError::SampleTooSmall { requested: n, classes: groups.len() });
    }
    if n > d.n_rows() {
        return Ok(d.clone());
    }
    let counts: Vec<usize> = groups.values().map(Vec::len).collect();
    let quotas = apportion(&counts, n, true, &counts).expect("n <= rows always fits");

    let mut rng = seeded_rng(seed);
    let mut chosen = Vec::with_capacity(n);
    for (rows, &q) in groups.into_values().zip(&quotas) {
        let mut rows = rows;
        chosen.extend_from_slice(choose_prefix(&mut rows, q, &mut rng));
    }
    chosen.shuffle(&mut rng);
    Ok(d.subset(&chosen))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitPair {
    pub train: Dataset,
    pub valid: Dataset,
    pub seed: u64,
}

impl SplitPair {
    /// Pairs two datasets explicitly. They must share a schema.
    pub fn new(train: Dataset, valid: Dataset, seed: u64) -> Result<Self> {
        if train.columns() != valid.columns() {
            return Err(TabularError::SchemaMismatch);
        }
        Ok(SplitPair { train, valid, seed })
    }
}

/// Stratified train/validation split. The validation quota is
/// `round(n * valid_fraction)`, apportioned per class with a floor of one, and
/// no class is ever moved entirely out of the training part.
pub fn split_train_valid(d: &Dataset, valid_fraction: f64, seed: u64) -> Result<SplitPair> {
    let (train_idx, valid_idx) = split_indices(d, valid_fraction, seed)?;
    Ok(SplitPair { train: d.subset(&train_idx), valid: d.subset(&valid_idx), seed })
}

/// Row indices of a stratified split, each side in ascending row order.
pub fn split_indices(d: &Dataset, valid_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(valid_fraction > 0.0 && valid_fraction < 1.0) {
        return Err(TabularError::InvalidFraction(valid_fraction));
    }
    let groups = rows_by_class(d);
    if groups.len() < 2 {
        return Err(TabularError::TooFewClasses(groups.len()));
    }
    let n = d.n_rows();
    let valid_total = (n as f64 * valid_fraction).round() as usize;
    if valid_total == 0 || valid_total >= n {
        return Err(TabularError::EmptySplitPart { rows: n, fraction: valid_fraction });
    }
    let counts: Vec<usize> = groups.values().map(Vec::len).collect();
    let caps: Vec<usize> = counts.iter().map(|c| c - 1).collect();
    let quotas = apportion(&counts, valid_total, true, &caps)
        .ok_or(TabularError::EmptySplitPart { rows: n, fraction: valid_fraction })?;

    let mut rng = seeded_rng(seed);
    let mut in_valid = vec![false; n];
    for (rows, &q) in groups.into_values().zip(&quotas) {
        let mut rows = rows;
        for &r in choose_prefix(&mut rows, q, &mut rng) {
            in_valid[r] = true;
        }
    }
    let (valid, train): (Vec<usize>, Vec<usize>) = (0..n).partition(|&r| in_valid[r]);
    Ok((train, valid))
}
