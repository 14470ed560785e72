use std::collections::{BTreeSet, HashMap};
use std::io::Read;
use std::path::Path;

use super::dataset::{Cell, Column, ColumnKind, Dataset};
use super::{Result, TabularError};

/// Share of non-missing tokens that must parse as finite reals for a column
/// to be inferred numeric.
pub const NUMERIC_THRESHOLD: f64 = 0.9;

pub type SchemaHints = HashMap<String, ColumnKind>;

pub fn load_csv(path: impl AsRef<Path>, target_column: &str, hints: Option<&SchemaHints>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| TabularError::Io { path: path.display().to_string(), source })?;
    read_csv(file, target_column, hints)
}

/// Parses CSV text from any reader. Same rules as [`load_csv`].
pub fn read_csv<R: Read>(reader: R, target_column: &str, hints: Option<&SchemaHints>) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(false).from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let target = headers
        .iter()
        .position(|h| h == target_column)
        .ok_or_else(|| TabularError::MissingTarget(target_column.to_string()))?;

    let mut raw: Vec<Vec<String>> = Vec::new();
    let mut labels = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let label = rec.get(target).unwrap_or("").trim();
        if label.is_empty() {
            return Err(TabularError::EmptyLabel { row: i });
        }
        labels.push(label.to_string());
        raw.push(
            rec.iter()
                .enumerate()
                .filter(|(j, _)| *j != target)
                .map(|(_, t)| t.trim().to_string())
                .collect(),
        );
    }
    if labels.is_empty() {
        return Err(TabularError::NoRows);
    }
    let distinct: BTreeSet<&str> = labels.iter().map(String::as_str).collect();
    if distinct.len() < 2 {
        return Err(TabularError::TooFewClasses(distinct.len()));
    }

    let names: Vec<&String> = headers.iter().enumerate().filter(|(j, _)| *j != target).map(|(_, h)| h).collect();
    let columns: Vec<Column> = names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let kind = hints
                .and_then(|h| h.get(name.as_str()).copied())
                .unwrap_or_else(|| infer_kind(raw.iter().map(|r| r[j].as_str())));
            Column { name: name.to_string(), kind }
        })
        .collect();

    let mut cells = Vec::with_capacity(raw.len() * columns.len());
    for row in raw {
        for (tok, col) in row.into_iter().zip(&columns) {
            cells.push(parse_cell(tok, col.kind));
        }
    }
    Dataset::from_cells(columns, cells, labels)
}

fn parse_real(tok: &str) -> Option<f64> {
    tok.parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Numeric when at least 90% of the non-empty tokens parse as finite reals.
/// An all-empty column counts as numeric.
pub fn infer_kind<'a>(tokens: impl Iterator<Item = &'a str>) -> ColumnKind {
    let (mut present, mut numeric) = (0usize, 0usize);
    for t in tokens.filter(|t| !t.is_empty()) {
        present += 1;
        if parse_real(t).is_some() {
            numeric += 1;
        }
    }
    if present == 0 || numeric as f64 >= NUMERIC_THRESHOLD * present as f64 {
        ColumnKind::Numeric
    } else {
        ColumnKind::Categorical
    }
}

fn parse_cell(tok: String, kind: ColumnKind) -> Cell {
    if tok.is_empty() {
        return Cell::Missing;
    }
    match kind {
        ColumnKind::Numeric => parse_real(&tok).map_or(Cell::Missing, Cell::Num),
        ColumnKind::Categorical => Cell::Cat(tok),
    }
}
