use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;
use std::time::{Duration, Instant};

use log::{debug, info};
use serde::{Deserialize, Serialize};

use crate::steps::{apply_data_step, evaluate_step, StepSpec, SurrogateConfig};
use crate::tabular::{stratified_sample, Dataset};

use super::cache::{DataCache, DEFAULT_CACHE_BUDGET};
use super::history::{early_stop_scoped, Decision, History, HistoryRecord, MedianScope, Origin};
use super::pipeline::{enumerate_pipelines, sample_pipelines, Pipeline, SearchSpace};
use super::{EngineError, Result};

pub const DEFAULT_SAMPLE_SIZE: usize = 5000;
pub const DEFAULT_PIPELINE_FRACTION: f64 = 0.10;

fn default_cache_budget() -> usize {
    DEFAULT_CACHE_BUDGET
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub seed: u64,
    pub sample_size: usize,
    pub pipeline_fraction: f64,
    pub surrogate: SurrogateConfig,
    #[serde(default)]
    pub median_scope: MedianScope,
    /// Bytes of intermediate data kept between pipelines. Changes speed only,
    /// so it is left out of serialized results.
    #[serde(skip, default = "default_cache_budget")]
    pub cache_budget: usize,
}

impl SearchConfig {
    pub fn new(seed: u64) -> Self {
        SearchConfig {
            seed,
            sample_size: DEFAULT_SAMPLE_SIZE,
            pipeline_fraction: DEFAULT_PIPELINE_FRACTION,
            surrogate: SurrogateConfig::default(),
            median_scope: MedianScope::default(),
            cache_budget: DEFAULT_CACHE_BUDGET,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.pipeline_fraction > 0.0 && self.pipeline_fraction <= 1.0) {
            return Err(EngineError::InvalidFraction(self.pipeline_fraction));
        }
        if self.sample_size == 0 {
            return Err(EngineError::InvalidConfig("sample_size must be positive".into()));
        }
        self.surrogate.validate()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PipelineStatus {
    Completed { final_acc: f64 },
    /// Zero-based index of the step whose accuracy failed the median test.
    TerminatedAt { step: usize },
    FailedAt { step: usize, error: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineOutcome {
    pub pipeline: Pipeline,
    pub in_hoe: bool,
    #[serde(flatten)]
    pub status: PipelineStatus,
    /// Steps run on this pipeline's behalf, during history building or search.
    pub steps_executed: usize,
    /// Steps walked during search whose accuracy came from History entries
    /// written by other pipelines.
    pub steps_cache_hit: usize,
    #[serde(skip)]
    pub elapsed: Duration,
}

impl PipelineOutcome {
    pub fn final_acc(&self) -> Option<f64> {
        match self.status {
            PipelineStatus::Completed { final_acc } => Some(final_acc),
            _ => None,
        }
    }

    pub fn is_completed(&self) -> bool {
        self.final_acc().is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchMode {
    Etop,
    Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Winner {
    pub pipeline: Pipeline,
    pub steps: Vec<StepSpec>,
    pub acc: f64,
}

/// Timing and bookkeeping that varies between equivalent runs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunStats {
    pub elapsed: Duration,
    pub hoe_elapsed: Duration,
    pub search_elapsed: Duration,
    pub hoe_step_executions: usize,
    /// Transforms re-applied to rebuild an evicted or never-cached prefix.
    pub transform_replays: usize,
    pub executions_by_key: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchResult {
    pub mode: SearchMode,
    pub config: SearchConfig,
    pub sampled_rows: usize,
    pub pipelines_total: usize,
    pub pipelines_completed: usize,
    pub winner: Option<Winner>,
    pub diagnostic: Option<String>,
    pub hoe: Vec<Pipeline>,
    pub outcomes: Vec<PipelineOutcome>,
    pub history: History,
    pub total_step_executions: usize,
    #[serde(skip)]
    pub stats: RunStats,
}

impl SearchResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("search results serialize")
    }
}

/// Best completed pipeline: highest accuracy, then fewest executed steps,
/// then the smallest canonical key.
pub fn select_winner(outcomes: &[PipelineOutcome]) -> Option<&PipelineOutcome> {
    let mut best: Option<(&PipelineOutcome, f64, String)> = None;
    for o in outcomes {
        let Some(acc) = o.final_acc() else { continue };
        let key = o.pipeline.key();
        let better = match &best {
            None => true,
            Some((b, b_acc, b_key)) => {
                acc > *b_acc
                    || (acc == *b_acc
                        && (o.steps_executed < b.steps_executed
                            || (o.steps_executed == b.steps_executed && key < *b_key)))
            }
        };
        if better {
            best = Some((o, acc, key));
        }
    }
    best.map(|(o, _, _)| o)
}

/// Result of walking one pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct Walk {
    pub status: PipelineStatus,
    /// Step indices evaluated during this walk.
    pub executed: Vec<usize>,
    /// Step indices answered from History.
    pub reused: Vec<usize>,
    pub elapsed: Duration,
}

/// Walks pipelines over one sampled dataset, sharing History, the data cache
/// and the record of failed prefixes between walks.
#[derive(Debug)]
pub struct Executor<'a> {
    root: Arc<Dataset>,
    surrogate: &'a SurrogateConfig,
    seed: u64,
    scope: MedianScope,
    history: History,
    failed: BTreeMap<String, String>,
    cache: DataCache,
    executions: BTreeMap<String, usize>,
    replays: usize,
}

impl<'a> Executor<'a> {
    pub fn new(data: Dataset, surrogate: &'a SurrogateConfig, seed: u64) -> Self {
        Executor {
            root: Arc::new(data),
            surrogate,
            seed,
            scope: MedianScope::default(),
            history: History::new(),
            failed: BTreeMap::new(),
            cache: DataCache::new(DEFAULT_CACHE_BUDGET),
            executions: BTreeMap::new(),
            replays: 0,
        }
    }

    pub fn with_cache_budget(mut self, bytes: usize) -> Self {
        self.cache = DataCache::new(bytes);
        self
    }

    pub fn with_median_scope(mut self, scope: MedianScope) -> Self {
        self.scope = scope;
        self
    }

    pub fn history(&self) -> &History {
        &self.history
    }

    pub fn into_history(self) -> History {
        self.history
    }

    /// Evaluations per prefix key, failures included.
    pub fn executions(&self) -> &BTreeMap<String, usize> {
        &self.executions
    }

    pub fn total_executions(&self) -> usize {
        self.executions.values().sum()
    }

    pub fn transform_replays(&self) -> usize {
        self.replays
    }

    /// Data after the first `upto` steps of `p`, rebuilt from the deepest
    /// available ancestor. `have` holds the deepest prefix materialized so
    /// far in the current walk.
    fn materialize(
        &mut self,
        p: &Pipeline,
        keys: &[String],
        upto: usize,
        have: &mut (usize, Arc<Dataset>),
    ) -> std::result::Result<Arc<Dataset>, String> {
        if have.0 == upto {
            return Ok(Arc::clone(&have.1));
        }
        let mut start = (have.0, Arc::clone(&have.1));
        for j in (have.0 + 1..=upto).rev() {
            if let Some(d) = self.cache.get(&keys[j - 1]) {
                start = (j, d);
                break;
            }
        }
        let (mut depth, mut data) = start;
        while depth < upto {
            let next = apply_data_step(&p.steps()[depth], &data).map_err(|e| e.to_string())?;
            self.replays += 1;
            data = Arc::new(next);
            self.cache.put(&keys[depth], Arc::clone(&data));
            depth += 1;
        }
        *have = (upto, Arc::clone(&data));
        Ok(data)
    }

    /// Runs `p` step by step. With `early` set, a data step whose accuracy
    /// does not beat the current median ends the walk.
    pub fn walk(&mut self, p: &Pipeline, origin: Origin, early: bool) -> Result<Walk> {
        let start = Instant::now();
        let keys = p.prefix_keys();
        let last = keys.len() - 1;
        let mut have = (0usize, Arc::clone(&self.root));
        let mut executed = Vec::new();
        let mut reused = Vec::new();
        let mut status = None;
        for (i, key) in keys.iter().enumerate() {
            if let Some(error) = self.failed.get(key) {
                status = Some(PipelineStatus::FailedAt { step: i, error: error.clone() });
                break;
            }
            let acc = match self.history.get(key) {
                Some(rec) => {
                    reused.push(i);
                    rec.acc
                }
                None => {
                    let step = &p.steps()[i];
                    let outcome = self
                        .materialize(p, &keys, i, &mut have)
                        .and_then(|input| evaluate_step(step, &input, self.surrogate, self.seed).map_err(|e| e.to_string()));
                    executed.push(i);
                    *self.executions.entry(key.clone()).or_default() += 1;
                    let outcome = match outcome {
                        Ok(o) => o,
                        Err(error) => {
                            debug!("{key}: failed: {error}");
                            self.failed.insert(key.clone(), error.clone());
                            status = Some(PipelineStatus::FailedAt { step: i, error });
                            break;
                        }
                    };
                    let acc = outcome.acc;
                    let record =
                        HistoryRecord { acc, kind: step.kind(), depth: i + 1, origin, elapsed: outcome.elapsed };
                    self.history.insert(key.clone(), record)?;
                    if let Some(d) = outcome.into_transformed() {
                        let d = Arc::new(d);
                        self.cache.put(key, Arc::clone(&d));
                        have = (i + 1, d);
                    }
                    acc
                }
            };
            if i == last {
                status = Some(PipelineStatus::Completed { final_acc: acc });
            } else if early && early_stop_scoped(&self.history, acc, self.scope, i + 1)? == Decision::Terminate {
                status = Some(PipelineStatus::TerminatedAt { step: i });
                break;
            }
        }
        let status = status.expect("every walk ends in a status");
        Ok(Walk { status, executed, reused, elapsed: start.elapsed() })
    }
}

/// Runs every sampled pipeline to completion and records every prefix.
pub fn build_history(sample: &[Pipeline], data: &Dataset, surrogate: &SurrogateConfig, seed: u64) -> Result<History> {
    let mut ex = Executor::new(data.clone(), surrogate, seed);
    for p in sample {
        ex.walk(p, Origin::Hoe, false)?;
    }
    Ok(ex.into_history())
}

/// History-guided search with median early stopping.
pub fn search(space: &SearchSpace, data: &Dataset, cfg: &SearchConfig) -> Result<SearchResult> {
    run(space, data, cfg, SearchMode::Etop)
}

/// Exhaustive baseline: every pipeline runs to completion. Prefix results
/// are still shared between pipelines.
pub fn grid_search(space: &SearchSpace, data: &Dataset, cfg: &SearchConfig) -> Result<SearchResult> {
    run(space, data, cfg, SearchMode::Grid)
}

fn run(space: &SearchSpace, data: &Dataset, cfg: &SearchConfig, mode: SearchMode) -> Result<SearchResult> {
    cfg.validate()?;
    let start = Instant::now();
    let sampled = stratified_sample(data, cfg.sample_size, cfg.seed)?;
    let sampled_rows = sampled.n_rows();
    let pipelines = enumerate_pipelines(space);
    let mut ex = Executor::new(sampled, &cfg.surrogate, cfg.seed)
        .with_cache_budget(cfg.cache_budget)
        .with_median_scope(cfg.median_scope);

    let hoe = match mode {
        SearchMode::Etop => sample_pipelines(&pipelines, cfg.pipeline_fraction, cfg.seed)?,
        SearchMode::Grid => Vec::new(),
    };
    let mut hoe_executed: BTreeMap<String, BTreeSet<usize>> = BTreeMap::new();
    let mut hoe_elapsed: BTreeMap<String, Duration> = BTreeMap::new();
    for p in &hoe {
        let w = ex.walk(p, Origin::Hoe, false)?;
        hoe_elapsed.insert(p.key(), w.elapsed);
        hoe_executed.insert(p.key(), w.executed.into_iter().collect());
    }
    let hoe_step_executions = ex.total_executions();
    let hoe_time = start.elapsed();
    info!("history built from {} pipelines, {} entries", hoe.len(), ex.history().len());

    let early = mode == SearchMode::Etop;
    let mut outcomes = Vec::with_capacity(pipelines.len());
    for p in pipelines {
        let w = ex.walk(&p, Origin::Search, early)?;
        let key = p.key();
        let own = hoe_executed.get(&key);
        let steps_cache_hit = w.reused.iter().filter(|i| own.is_none_or(|s| !s.contains(i))).count();
        let steps_executed = w.executed.len() + own.map_or(0, BTreeSet::len);
        let elapsed = w.elapsed + hoe_elapsed.get(&key).copied().unwrap_or_default();
        debug!("{key}: {:?}", w.status);
        outcomes.push(PipelineOutcome {
            in_hoe: own.is_some(),
            pipeline: p,
            status: w.status,
            steps_executed,
            steps_cache_hit,
            elapsed,
        });
    }

    let winner = select_winner(&outcomes).map(|o| Winner {
        pipeline: o.pipeline.clone(),
        steps: o.pipeline.steps().to_vec(),
        acc: o.final_acc().expect("winner completed"),
    });
    let pipelines_completed = outcomes.iter().filter(|o| o.is_completed()).count();
    let diagnostic = winner.is_none().then(|| {
        let failed = outcomes.iter().filter(|o| matches!(o.status, PipelineStatus::FailedAt { .. })).count();
        format!("no pipeline completed: {failed} failed, {} terminated", outcomes.len() - failed)
    });
    let elapsed = start.elapsed();
    info!("{mode:?}: {pipelines_completed}/{} completed, {} step executions", outcomes.len(), ex.total_executions());

    let stats = RunStats {
        elapsed,
        hoe_elapsed: hoe_time,
        search_elapsed: elapsed - hoe_time,
        hoe_step_executions,
        transform_replays: ex.transform_replays(),
        executions_by_key: ex.executions().clone(),
    };
    Ok(SearchResult {
        mode,
        config: cfg.clone(),
        sampled_rows,
        pipelines_total: outcomes.len(),
        pipelines_completed,
        winner,
        diagnostic,
        hoe,
        total_step_executions: ex.total_executions(),
        history: ex.into_history(),
        outcomes,
        stats,
    })
}
