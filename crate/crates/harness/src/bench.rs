use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use log::info;
use serde::{Deserialize, Serialize};

use etop_core::engine::{SearchConfig, SearchSpace};
use etop_core::tabular::load_csv;

use crate::config::Clock;
use crate::error::{HarnessError, Result};
use crate::gains::{compare, GainsReport, CSV_HEADER};

/// One dataset of a benchmark manifest. Paths are resolved against the
/// manifest's directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchEntry {
    pub name: String,
    pub data: PathBuf,
    pub target: String,
    pub space: PathBuf,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawManifest {
    entries: Vec<RawEntry>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEntry {
    name: String,
    data: PathBuf,
    target: String,
    space: PathBuf,
}

/// Reads `{"entries": [{"name", "data", "target", "space"}, ...]}` and checks
/// that every referenced file exists.
pub fn load_bench_manifest(path: impl AsRef<Path>) -> Result<Vec<BenchEntry>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| HarnessError::Data(format!("cannot read manifest {}: {e}", path.display())))?;
    let raw: RawManifest = serde_json::from_str(&text)
        .map_err(|e| HarnessError::Data(format!("malformed manifest {}: {e}", path.display())))?;
    if raw.entries.is_empty() {
        return Err(HarnessError::Usage(format!("manifest {} has no entries", path.display())));
    }
    let base = path.parent().unwrap_or(Path::new(""));
    let mut seen = BTreeSet::new();
    let mut entries = Vec::with_capacity(raw.entries.len());
    for e in raw.entries {
        if e.name.is_empty() || e.name.contains([',', '\n', '"']) {
            return Err(HarnessError::Data(format!("manifest entry name {:?} is empty or not CSV-safe", e.name)));
        }
        if !seen.insert(e.name.clone()) {
            return Err(HarnessError::Data(format!("duplicate manifest entry {}", e.name)));
        }
        let entry = BenchEntry { data: base.join(&e.data), space: base.join(&e.space), target: e.target, name: e.name };
        for (what, p) in [("dataset", &entry.data), ("space", &entry.space)] {
            if !p.is_file() {
                return Err(HarnessError::Data(format!("entry {}: {what} {} not found", entry.name, p.display())));
            }
        }
        entries.push(entry);
    }
    Ok(entries)
}

/// Summary over all benchmark entries. Wins compare holdout accuracies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub entries: usize,
    pub mean_etop_acc: f64,
    pub mean_grid_acc: f64,
    pub mean_acc_gain_pp: f64,
    pub mean_time_gain_factor: f64,
    pub mean_pipelines_completed: f64,
    pub mean_pipelines_total: f64,
    pub mean_steps_etop: f64,
    pub mean_steps_grid: f64,
    pub etop_wins: usize,
    pub grid_wins: usize,
    pub ties: usize,
}

impl Aggregate {
    pub fn from_reports(reports: &[GainsReport]) -> Self {
        let n = reports.len();
        let mean = |f: &dyn Fn(&GainsReport) -> f64| {
            if n == 0 {
                0.0
            } else {
                reports.iter().map(f).sum::<f64>() / n as f64
            }
        };
        Aggregate {
            entries: n,
            mean_etop_acc: mean(&|r| r.etop_acc),
            mean_grid_acc: mean(&|r| r.grid_acc),
            mean_acc_gain_pp: mean(&|r| r.acc_gain_pp),
            mean_time_gain_factor: mean(&|r| r.time_gain_factor),
            mean_pipelines_completed: mean(&|r| r.pipelines_completed_etop as f64),
            mean_pipelines_total: mean(&|r| r.pipelines_total as f64),
            mean_steps_etop: mean(&|r| r.steps_executed_etop as f64),
            mean_steps_grid: mean(&|r| r.steps_executed_grid as f64),
            etop_wins: reports.iter().filter(|r| r.etop_acc > r.grid_acc).count(),
            grid_wins: reports.iter().filter(|r| r.etop_acc < r.grid_acc).count(),
            ties: reports.iter().filter(|r| r.etop_acc == r.grid_acc).count(),
        }
    }

    pub fn csv_row(&self) -> String {
        format!(
            "mean,{},{},{},{},{},{},{},{}",
            self.mean_etop_acc,
            self.mean_grid_acc,
            self.mean_acc_gain_pp,
            self.mean_time_gain_factor,
            self.mean_pipelines_completed,
            self.mean_pipelines_total,
            self.mean_steps_etop,
            self.mean_steps_grid
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub reports: Vec<GainsReport>,
    pub aggregate: Aggregate,
}

impl BenchReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.reports {
            out.push_str(&r.csv_row());
            out.push('\n');
        }
        out.push_str(&self.aggregate.csv_row());
        out.push('\n');
        out
    }

    /// Fixed-width summary for the terminal.
    pub fn table(&self) -> String {
        let mut out = format!(
            "{:<16} {:>9} {:>9} {:>9} {:>9} {:>11} {:>11}\n",
            "dataset", "etop_acc", "grid_acc", "gain_pp", "time_x", "completed", "steps e/g"
        );
        for r in &self.reports {
            out.push_str(&format!(
                "{:<16} {:>9.4} {:>9.4} {:>9.2} {:>9.3} {:>11} {:>11}\n",
                r.dataset,
                r.etop_acc,
                r.grid_acc,
                r.acc_gain_pp,
                r.time_gain_factor,
                format!("{}/{}", r.pipelines_completed_etop, r.pipelines_total),
                format!("{}/{}", r.steps_executed_etop, r.steps_executed_grid),
            ));
        }
        let a = &self.aggregate;
        out.push_str(&format!(
            "{:<16} {:>9.4} {:>9.4} {:>9.2} {:>9.3}   wins etop/grid/tie {}/{}/{}\n",
            "mean", a.mean_etop_acc, a.mean_grid_acc, a.mean_acc_gain_pp, a.mean_time_gain_factor, a.etop_wins,
            a.grid_wins, a.ties
        ));
        out
    }
}

/// Runs `compare` on every entry. Entry `i` uses seed `template.seed + i`.
pub fn run_bench(entries: &[BenchEntry], template: &SearchConfig, clock: Clock) -> Result<BenchReport> {
    if entries.is_empty() {
        return Err(HarnessError::Usage("nothing to benchmark".into()));
    }
    let mut reports = Vec::with_capacity(entries.len());
    for (i, e) in entries.iter().enumerate() {
        let in_entry = |msg: String| HarnessError::Data(format!("entry {}: {msg}", e.name));
        let raw = load_csv(&e.data, &e.target, None).map_err(|err| in_entry(err.to_string()))?;
        let space = SearchSpace::load(&e.space).map_err(|err| in_entry(err.to_string()))?;
        let cfg = SearchConfig { seed: template.seed.wrapping_add(i as u64), ..template.clone() };
        let cmp = compare(&e.name, &raw, &space, &cfg, clock).map_err(|err| match err {
            HarnessError::NoWinner(m) => HarnessError::NoWinner(format!("entry {}: {m}", e.name)),
            other => in_entry(other.to_string()),
        })?;
        info!("{}: etop {:.4} grid {:.4}", e.name, cmp.report.etop_acc, cmp.report.grid_acc);
        reports.push(cmp.report);
    }
    let aggregate = Aggregate::from_reports(&reports);
    Ok(BenchReport { reports, aggregate })
}
