use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Result, TabularError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Numeric,
    Categorical,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
}

impl Column {
    pub fn numeric(name: impl Into<String>) -> Self {
        Column { name: name.into(), kind: ColumnKind::Numeric }
    }

    pub fn categorical(name: impl Into<String>) -> Self {
        Column { name: name.into(), kind: ColumnKind::Categorical }
    }
}

/// A single feature value. `Missing` is kept explicit; nothing is imputed at
/// load time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Cell {
    Num(f64),
    Cat(String),
    Missing,
}

impl Cell {
    pub fn is_missing(&self) -> bool {
        matches!(self, Cell::Missing)
    }

    pub fn as_num(&self) -> Option<f64> {
        match self {
            Cell::Num(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_cat(&self) -> Option<&str> {
        match self {
            Cell::Cat(s) => Some(s),
            _ => None,
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Num(v) => write!(f, "{v}"),
            Cell::Cat(s) => f.write_str(s),
            Cell::Missing => Ok(()),
        }
    }
}

/// Immutable tabular dataset: a row-major feature table plus one class label
/// per row.
///
/// `Dataset::new` checks shape and cell/kind agreement. The two-class minimum
/// is enforced by the loader (`load_csv`); subsets produced internally may
/// legitimately hold a single class, and learners reject those themselves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    columns: Vec<Column>,
    cells: Vec<Cell>,
    labels: Vec<String>,
}

impl Dataset {
    pub fn new(columns: Vec<Column>, rows: Vec<Vec<Cell>>, labels: Vec<String>) -> Result<Self> {
        let width = columns.len();
        let mut cells = Vec::with_capacity(rows.len() * width);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != width {
                return Err(TabularError::RowWidth { row: i, expected: width, found: row.len() });
            }
            cells.extend(row);
        }
        Self::from_cells(columns, cells, labels)
    }

    /// Builds a dataset from a flat row-major cell buffer.
    pub fn from_cells(columns: Vec<Column>, cells: Vec<Cell>, labels: Vec<String>) -> Result<Self> {
        let width = columns.len();
        if labels.is_empty() {
            return Err(TabularError::NoRows);
        }
        if cells.len() != labels.len() * width {
            return Err(TabularError::Shape { rows: labels.len(), width, cells: cells.len() });
        }
        if let Some(row) = labels.iter().position(|l| l.is_empty()) {
            return Err(TabularError::EmptyLabel { row });
        }
        for (idx, cell) in cells.iter().enumerate() {
            let (row, col) = if width == 0 { (0, 0) } else { (idx / width, idx % width) };
            let ok = match (&columns[col].kind, cell) {
                (_, Cell::Missing) => true,
                (ColumnKind::Numeric, Cell::Num(v)) => v.is_finite(),
                (ColumnKind::Categorical, Cell::Cat(_)) => true,
                _ => false,
            };
            if !ok {
                return Err(TabularError::BadCell { row, column: columns[col].name.clone() });
            }
        }
        Ok(Dataset { columns, cells, labels })
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn row(&self, r: usize) -> &[Cell] {
        let w = self.columns.len();
        &self.cells[r * w..(r + 1) * w]
    }

    pub fn cell(&self, r: usize, c: usize) -> &Cell {
        &self.cells[r * self.columns.len() + c]
    }

    pub fn column_cells(&self, c: usize) -> impl Iterator<Item = &Cell> + '_ {
        let w = self.columns.len();
        (0..self.n_rows()).map(move |r| &self.cells[r * w + c])
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// Distinct label tokens in lexicographic order.
    pub fn classes(&self) -> Vec<String> {
        self.class_frequencies().into_keys().collect()
    }

    pub fn n_classes(&self) -> usize {
        self.class_frequencies().len()
    }

    pub fn class_frequencies(&self) -> BTreeMap<String, usize> {
        let mut freq = BTreeMap::new();
        for l in &self.labels {
            *freq.entry(l.clone()).or_insert(0) += 1;
        }
        freq
    }

    pub fn missing_count(&self) -> usize {
        self.cells.iter().filter(|c| c.is_missing()).count()
    }

    pub fn has_categorical(&self) -> bool {
        self.columns.iter().any(|c| c.kind == ColumnKind::Categorical)
    }

    /// Rows `indices` (in that order) as a new dataset with the same schema.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let w = self.columns.len();
        let mut cells = Vec::with_capacity(indices.len() * w);
        let mut labels = Vec::with_capacity(indices.len());
        for &r in indices {
            cells.extend_from_slice(self.row(r));
            labels.push(self.labels[r].clone());
        }
        Dataset { columns: self.columns.clone(), cells, labels }
    }

    /// Replaces the feature table, keeping labels. Used by data steps, which
    /// never touch rows or labels.
    pub fn with_features(&self, columns: Vec<Column>, cells: Vec<Cell>) -> Result<Dataset> {
        Self::from_cells(columns, cells, self.labels.clone())
    }

    /// Rough heap footprint, used for the transformed-data cache budget.
    pub fn approx_bytes(&self) -> usize {
        let cell_bytes = self.cells.len() * std::mem::size_of::<Cell>();
        let cat_bytes: usize = self
            .cells
            .iter()
            .map(|c| match c {
                Cell::Cat(s) => s.len(),
                _ => 0,
            })
            .sum();
        let label_bytes: usize =
            self.labels.iter().map(|l| l.len() + std::mem::size_of::<String>()).sum();
        cell_bytes + cat_bytes + label_bytes
    }
}
