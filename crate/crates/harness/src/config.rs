use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use etop_core::engine::{MedianScope, SearchConfig, SearchSpace, DEFAULT_CACHE_BUDGET};
use etop_core::steps::SurrogateConfig;
use etop_core::tabular::{load_csv, Dataset};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Etop,
    Grid,
}

/// How search time is measured for the time-gain factor.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Clock {
    /// Monotonic wall clock around the search call, in seconds.
    #[default]
    Wall,
    /// Number of step executions. Machine independent, so reports are
    /// byte-reproducible.
    Work,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub data_path: PathBuf,
    pub target: String,
    pub space_path: PathBuf,
    pub mode: Mode,
    pub sample_size: usize,
    /// Ignored in grid mode.
    pub pipeline_fraction: f64,
    pub seed: u64,
    pub surrogate: SurrogateConfig,
    pub output_path: Option<PathBuf>,
    pub cache_data_budget: usize,
    pub median_scope: MedianScope,
    pub clock: Clock,
}

impl RunConfig {
    pub fn new(data_path: impl Into<PathBuf>, target: &str, space_path: impl Into<PathBuf>, seed: u64) -> Self {
        let defaults = SearchConfig::new(seed);
        RunConfig {
            data_path: data_path.into(),
            target: target.to_string(),
            space_path: space_path.into(),
            mode: Mode::Etop,
            sample_size: defaults.sample_size,
            pipeline_fraction: defaults.pipeline_fraction,
            seed,
            surrogate: defaults.surrogate,
            output_path: None,
            cache_data_budget: DEFAULT_CACHE_BUDGET,
            median_scope: defaults.median_scope,
            clock: Clock::Wall,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sample_size == 0 {
            return Err(HarnessError::Usage("--sample-size must be positive".into()));
        }
        if self.mode == Mode::Etop && !(self.pipeline_fraction > 0.0 && self.pipeline_fraction <= 1.0) {
            return Err(HarnessError::Usage(format!(
                "--pipeline-fraction must be in (0, 1], got {}",
                self.pipeline_fraction
            )));
        }
        self.surrogate.validate().map_err(|e| HarnessError::Usage(e.to_string()))
    }

    pub fn search_config(&self) -> SearchConfig {
        SearchConfig {
            seed: self.seed,
            sample_size: self.sample_size,
            pipeline_fraction: self.pipeline_fraction,
            surrogate: self.surrogate,
            median_scope: self.median_scope,
            cache_budget: self.cache_data_budget,
        }
    }

    pub fn load_dataset(&self) -> Result<Dataset> {
        Ok(load_csv(&self.data_path, &self.target, None)?)
    }

    pub fn load_space(&self) -> Result<SearchSpace> {
        SearchSpace::load(&self.space_path)
            .map_err(|e| HarnessError::Data(format!("{}: {e}", self.space_path.display())))
    }
}
