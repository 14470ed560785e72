use serde::{Deserialize, Serialize};

use etop_core::engine::{search, Pipeline, SearchConfig, SearchResult, SearchSpace};
use etop_core::tabular::{split_train_valid, stratified_sample, Dataset};

use crate::baseline::run_grid_baseline;
use crate::config::Clock;
use crate::error::{HarnessError, Result};

/// Share of the raw dataset held out for final scoring, carved before any
/// sampling.
pub const HOLDOUT_FRACTION: f64 = 0.2;

pub const CSV_HEADER: &str =
    "dataset,etop_acc,grid_acc,acc_gain_pp,time_gain_factor,pipelines_completed,pipelines_total,steps_etop,steps_grid";

/// Accuracy gain in percentage points; both inputs in percent.
pub fn accuracy_gain_pp(etop_pct: f64, grid_pct: f64) -> f64 {
    etop_pct - grid_pct
}

/// How many times faster the eTOP run was than the baseline.
pub fn time_gain_factor(grid_time: f64, etop_time: f64) -> Result<f64> {
    if !(etop_time > 0.0 && etop_time.is_finite()) {
        return Err(HarnessError::Data(format!("eTOP time must be positive, got {etop_time}")));
    }
    if !(grid_time >= 0.0 && grid_time.is_finite()) {
        return Err(HarnessError::Data(format!("grid time must be non-negative, got {grid_time}")));
    }
    Ok(grid_time / etop_time)
}

/// A search result with the time charged to it under some clock.
#[derive(Debug, Clone)]
pub struct TimedResult {
    pub result: SearchResult,
    pub time: f64,
    pub clock: Clock,
}

impl TimedResult {
    pub fn new(result: SearchResult, clock: Clock) -> Self {
        let time = match clock {
            Clock::Wall => result.stats.elapsed.as_secs_f64(),
            Clock::Work => result.total_step_executions as f64,
        };
        TimedResult { result, time, clock }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainsReport {
    pub dataset: String,
    pub seed: u64,
    pub clock: Clock,
    pub etop_winner: Pipeline,
    pub grid_winner: Pipeline,
    /// Validation accuracy each winner reached during search.
    pub etop_search_acc: f64,
    pub grid_search_acc: f64,
    /// Holdout accuracy of each winner after retraining.
    pub etop_acc: f64,
    pub grid_acc: f64,
    pub acc_gain_pp: f64,
    pub time_gain_factor: f64,
    pub etop_time: f64,
    pub grid_time: f64,
    pub pipelines_completed_etop: usize,
    pub pipelines_total: usize,
    pub steps_executed_etop: usize,
    pub steps_executed_grid: usize,
}

impl GainsReport {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.dataset,
            self.etop_acc,
            self.grid_acc,
            self.acc_gain_pp,
            self.time_gain_factor,
            self.pipelines_completed_etop,
            self.pipelines_total,
            self.steps_executed_etop,
            self.steps_executed_grid
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

/// Fits `pipeline` on all of `train` and scores it on `holdout`.
pub fn holdout_accuracy(pipeline: &Pipeline, train: &Dataset, holdout: &Dataset, seed: u64) -> Result<f64> {
    let fitted = pipeline.fit(train, seed)?;
    Ok(fitted.score(holdout)?)
}

fn winner_of(r: &SearchResult, label: &str) -> Result<(Pipeline, f64)> {
    match &r.winner {
        Some(w) => Ok((w.pipeline.clone(), w.acc)),
        None => Err(HarnessError::NoWinner(format!(
            "{label} run: {}",
            r.diagnostic.as_deref().unwrap_or("no completed pipeline")
        ))),
    }
}

/// Retrains both winners on `train` (the sampled search data) and compares
/// them on `holdout`.
pub fn compute_gains(
    dataset: &str,
    etop: &TimedResult,
    grid: &TimedResult,
    train: &Dataset,
    holdout: &Dataset,
) -> Result<GainsReport> {
    let (etop_winner, etop_search_acc) = winner_of(&etop.result, "eTOP")?;
    let (grid_winner, grid_search_acc) = winner_of(&grid.result, "grid")?;
    let etop_acc = holdout_accuracy(&etop_winner, train, holdout, etop.result.config.seed)?;
    let grid_acc = holdout_accuracy(&grid_winner, train, holdout, grid.result.config.seed)?;
    if etop.clock != grid.clock {
        return Err(HarnessError::Usage("eTOP and grid times use different clocks".into()));
    }
    Ok(GainsReport {
        dataset: dataset.to_string(),
        seed: etop.result.config.seed,
        clock: etop.clock,
        etop_winner,
        grid_winner,
        etop_search_acc,
        grid_search_acc,
        etop_acc,
        grid_acc,
        acc_gain_pp: accuracy_gain_pp(100.0 * etop_acc, 100.0 * grid_acc),
        time_gain_factor: time_gain_factor(grid.time, etop.time)?,
        etop_time: etop.time,
        grid_time: grid.time,
        pipelines_completed_etop: etop.result.pipelines_completed,
        pipelines_total: etop.result.pipelines_total,
        steps_executed_etop: etop.result.total_step_executions,
        steps_executed_grid: grid.result.total_step_executions,
    })
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub report: GainsReport,
    pub etop: TimedResult,
    pub grid: TimedResult,
}

/// Holds out a stratified share of `raw`, runs eTOP and the grid baseline on
/// the rest with the same configuration, and compares the winners.
pub fn compare(dataset: &str, raw: &Dataset, space: &SearchSpace, cfg: &SearchConfig, clock: Clock) -> Result<Comparison> {
    let split = split_train_valid(raw, HOLDOUT_FRACTION, cfg.seed)?;
    let etop = TimedResult::new(search(space, &split.train, cfg)?, clock);
    let grid = TimedResult::new(run_grid_baseline(space, &split.train, cfg)?, clock);
    let train = stratified_sample(&split.train, cfg.sample_size, cfg.seed)?;
    let report = compute_gains(dataset, &etop, &grid, &train, &split.valid)?;
    Ok(Comparison { report, etop, grid })
}
