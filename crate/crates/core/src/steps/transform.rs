//! Data steps. Each step is fitted on its input and then applied; fitting and
//! applying are separate so a pipeline fitted on training rows can transform
//! held-out rows with the training statistics.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::tabular::{Cell, Column, ColumnKind, Dataset};

use super::spec::{DataOp, EncodeKind, ImputeStrategy, ScaleKind, SelectMethod, StepOp, StepSpec};
use super::{Result, StepError};

/// Token written into categorical cells by `impute{constant_zero}`.
pub const ZERO_TOKEN: &str = "0";

/// Ordinal code for a category not seen while fitting.
pub const UNSEEN_ORDINAL: f64 = -1.0;

#[derive(Debug, Clone, PartialEq)]
pub enum FittedTransform {
    Impute { input: Vec<Column>, fills: Vec<Cell> },
    /// Per column `Some((shift, divisor))`; `None` leaves the column as is.
    Scale { input: Vec<Column>, affine: Vec<Option<(f64, f64)>> },
    Encode { input: Vec<Column>, kind: EncodeKind, categories: Vec<Option<Vec<String>>>, output: Vec<Column> },
    Select { input: Vec<Column>, keep: Vec<usize> },
}

pub fn fit_data_step(step: &StepSpec, x: &Dataset) -> Result<FittedTransform> {
    let op = match step.op() {
        StepOp::Data(op) => op,
        StepOp::Model(_) => return Err(StepError::WrongKind { step: step.canonical(), expected: "data step" }),
    };
    let input = x.columns().to_vec();
    Ok(match op {
        DataOp::Impute(strategy) => {
            let fills = (0..x.n_features()).map(|c| impute_fill(x, c, strategy)).collect();
            FittedTransform::Impute { input, fills }
        }
        DataOp::Scale(kind) => {
            let affine = (0..x.n_features())
                .map(|c| match (kind, x.columns()[c].kind) {
                    (ScaleKind::None, _) | (_, ColumnKind::Categorical) => None,
                    (kind, ColumnKind::Numeric) => scale_params(&present_values(x, c), kind),
                })
                .collect();
            FittedTransform::Scale { input, affine }
        }
        DataOp::Encode(kind) => {
            let mut categories = Vec::with_capacity(x.n_features());
            let mut output = Vec::new();
            for (c, col) in x.columns().iter().enumerate() {
                if col.kind == ColumnKind::Numeric {
                    categories.push(None);
                    output.push(col.clone());
                    continue;
                }
                let cats = sorted_categories(x, c);
                match kind {
                    EncodeKind::OneHot => {
                        output.extend(cats.iter().map(|cat| Column::numeric(format!("{}={}", col.name, cat))))
                    }
                    EncodeKind::Ordinal => output.push(Column::numeric(col.name.clone())),
                }
                categories.push(Some(cats));
            }
            FittedTransform::Encode { input, kind, categories, output }
        }
        DataOp::Select { method, k } => {
            let n = x.n_features();
            if k > n {
                return Err(StepError::SelectTooLarge { k, features: n });
            }
            let view = coerce_numeric(x);
            let scores: Vec<f64> = (0..n)
                .map(|c| {
                    let col: Vec<f64> = view.column_cells(c).map(|v| v.as_num().unwrap_or(0.0)).collect();
                    match method {
                        SelectMethod::Variance => variance(&col),
                        SelectMethod::AnovaF => anova_f(&col, view.labels()),
                    }
                })
                .collect();
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
            let mut keep = order[..k].to_vec();
            keep.sort_unstable();
            FittedTransform::Select { input, keep }
        }
    })
}

impl FittedTransform {
    fn input(&self) -> &[Column] {
        match self {
            FittedTransform::Impute { input, .. }
            | FittedTransform::Scale { input, .. }
            | FittedTransform::Encode { input, .. }
            | FittedTransform::Select { input, .. } => input,
        }
    }

    pub fn transform(&self, x: &Dataset) -> Result<Dataset> {
        if x.columns() != self.input() {
            return Err(StepError::SchemaMismatch);
        }
        let (rows, width) = (x.n_rows(), x.n_features());
        match self {
            FittedTransform::Impute { input, fills } => {
                let cells = x
                    .cells()
                    .iter()
                    .enumerate()
                    .map(|(i, cell)| if cell.is_missing() { fills[i % width].clone() } else { cell.clone() })
                    .collect();
                Ok(x.with_features(input.clone(), cells)?)
            }
            FittedTransform::Scale { input, affine } => {
                let cells = x
                    .cells()
                    .iter()
                    .enumerate()
                    .map(|(i, cell)| match (cell, affine[i % width]) {
                        (Cell::Num(v), Some((shift, div))) => Cell::Num((v - shift) / div),
                        _ => cell.clone(),
                    })
                    .collect();
                Ok(x.with_features(input.clone(), cells)?)
            }
            FittedTransform::Encode { kind, categories, output, .. } => {
                let mut cells = Vec::with_capacity(rows * output.len());
                for r in 0..rows {
                    for (cell, cats) in x.row(r).iter().zip(categories) {
                        let Some(cats) = cats else {
                            cells.push(cell.clone());
                            continue;
                        };
                        let pos = cell.as_cat().map(|t| cats.binary_search_by(|c| c.as_str().cmp(t)));
                        match kind {
                            EncodeKind::OneHot => match pos {
                                None => cells.extend(std::iter::repeat(Cell::Missing).take(cats.len())),
                                Some(p) => cells.extend(
                                    (0..cats.len()).map(|j| Cell::Num(if p == Ok(j) { 1.0 } else { 0.0 })),
                                ),
                            },
                            EncodeKind::Ordinal => cells.push(match pos {
                                None => Cell::Missing,
                                Some(Ok(j)) => Cell::Num(j as f64),
                                Some(Err(_)) => Cell::Num(UNSEEN_ORDINAL),
                            }),
                        }
                    }
                }
                Ok(x.with_features(output.clone(), cells)?)
            }
            FittedTransform::Select { input, keep } => {
                let columns = keep.iter().map(|&c| input[c].clone()).collect();
                let mut cells = Vec::with_capacity(rows * keep.len());
                for r in 0..rows {
                    let row = x.row(r);
                    cells.extend(keep.iter().map(|&c| row[c].clone()));
                }
                Ok(x.with_features(columns, cells)?)
            }
        }
    }
}

/// Fits `step` on `x` and applies it to `x`.
pub fn apply_data_step(step: &StepSpec, x: &Dataset) -> Result<Dataset> {
    fit_data_step(step, x)?.transform(x)
}

/// True when every column is numeric and no cell is missing.
pub fn is_model_ready(x: &Dataset) -> bool {
    !x.has_categorical() && x.missing_count() == 0
}

/// Fully numeric view of `x`: categorical columns become lexicographic ranks
/// and missing cells take the column mean (0 for an all-missing column).
pub fn coerce_numeric(x: &Dataset) -> Dataset {
    let width = x.n_features();
    let mut columns = Vec::with_capacity(width);
    let mut numeric: Vec<Vec<Option<f64>>> = Vec::with_capacity(width);
    for (c, col) in x.columns().iter().enumerate() {
        columns.push(Column::numeric(col.name.clone()));
        let values: Vec<Option<f64>> = match col.kind {
            ColumnKind::Numeric => x.column_cells(c).map(Cell::as_num).collect(),
            ColumnKind::Categorical => {
                let cats = sorted_categories(x, c);
                x.column_cells(c)
                    .map(|cell| cell.as_cat().and_then(|t| cats.binary_search_by(|k| k.as_str().cmp(t)).ok()))
                    .map(|p| p.map(|j| j as f64))
                    .collect()
            }
        };
        numeric.push(values);
    }
    let fills: Vec<f64> = numeric
        .iter()
        .map(|vals| {
            let present: Vec<f64> = vals.iter().flatten().copied().collect();
            if present.is_empty() { 0.0 } else { mean(&present) }
        })
        .collect();
    let mut cells = Vec::with_capacity(x.n_rows() * width);
    for r in 0..x.n_rows() {
        for c in 0..width {
            cells.push(Cell::Num(numeric[c][r].unwrap_or(fills[c])));
        }
    }
    x.with_features(columns, cells).expect("coerced cells are finite numbers")
}

fn present_values(x: &Dataset, c: usize) -> Vec<f64> {
    x.column_cells(c).filter_map(Cell::as_num).collect()
}

fn sorted_categories(x: &Dataset, c: usize) -> Vec<String> {
    let mut cats: Vec<String> = x.column_cells(c).filter_map(|v| v.as_cat().map(str::to_string)).collect();
    cats.sort();
    cats.dedup();
    cats
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 { s[n / 2] } else { (s[n / 2 - 1] + s[n / 2]) / 2.0 }
}

/// Most frequent value; ties go to the smallest.
fn numeric_mode(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let (mut best, mut best_run) = (s[0], 0usize);
    let mut i = 0;
    while i < s.len() {
        let j = s[i..].iter().position(|x| x.total_cmp(&s[i]) != Ordering::Equal).map_or(s.len(), |p| i + p);
        if j - i > best_run {
            best = s[i];
            best_run = j - i;
        }
        i = j;
    }
    best
}

fn impute_fill(x: &Dataset, c: usize, strategy: ImputeStrategy) -> Cell {
    match x.columns()[c].kind {
        ColumnKind::Numeric => {
            let vals = present_values(x, c);
            if vals.is_empty() || strategy == ImputeStrategy::ConstantZero {
                return Cell::Num(0.0);
            }
            Cell::Num(match strategy {
                ImputeStrategy::Mean => mean(&vals),
                ImputeStrategy::Median => median(&vals),
                _ => numeric_mode(&vals),
            })
        }
        ColumnKind::Categorical => {
            if strategy == ImputeStrategy::ConstantZero {
                return Cell::Cat(ZERO_TOKEN.to_string());
            }
            // mean and median have no meaning for tokens; all three use the mode
            let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
            for t in x.column_cells(c).filter_map(Cell::as_cat) {
                *counts.entry(t).or_insert(0) += 1;
            }
            let best = counts.iter().fold(None::<(&str, usize)>, |acc, (t, &n)| match acc {
                Some((_, m)) if m >= n => acc,
                _ => Some((t, n)),
            });
            Cell::Cat(best.map_or(ZERO_TOKEN, |(t, _)| t).to_string())
        }
    }
}

fn scale_params(vals: &[f64], kind: ScaleKind) -> Option<(f64, f64)> {
    if vals.is_empty() {
        return None;
    }
    match kind {
        ScaleKind::None => None,
        ScaleKind::Standard => {
            let m = mean(vals);
            // a constant column is only centred; its computed variance can be
            // a rounding artefact rather than zero
            let constant = vals.iter().all(|v| *v == vals[0]);
            let sd = if constant { 1.0 } else { variance(vals).sqrt() };
            Some((m, sd))
        }
        ScaleKind::MinMax => {
            let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            Some((lo, if hi > lo { hi - lo } else { 1.0 }))
        }
    }
}

/// Sample variance (n - 1 denominator); 0 for fewer than two values.
fn variance(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v);
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64
}

/// One-way ANOVA F statistic of `values` grouped by `labels`.
fn anova_f(values: &[f64], labels: &[String]) -> f64 {
    let mut groups: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
    for (v, l) in values.iter().zip(labels) {
        let g = groups.entry(l.as_str()).or_insert((0.0, 0));
        g.0 += v;
        g.1 += 1;
    }
    let n = values.len();
    let k = groups.len();
    if k < 2 || n <= k {
        return 0.0;
    }
    let grand = mean(values);
    let ssb: f64 = groups.values().map(|(s, c)| *c as f64 * (s / *c as f64 - grand).powi(2)).sum();
    let ssw: f64 = values
        .iter()
        .zip(labels)
        .map(|(v, l)| {
            let (s, c) = groups[l.as_str()];
            (v - s / c as f64).powi(2)
        })
        .sum();
    let between = ssb / (k - 1) as f64;
    let within = ssw / (n - k) as f64;
    if within > 0.0 {
        between / within
    } else if between > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}
