use etop_core::engine::{grid_search, SearchConfig, SearchResult, SearchSpace};
use etop_core::tabular::Dataset;

use crate::error::Result;

/// Runs every pipeline of `space` end to end on the sampled data, with no
/// History phase and no early termination. Transforms are still shared
/// between pipelines with a common prefix.
pub fn run_grid_baseline(space: &SearchSpace, data: &Dataset, cfg: &SearchConfig) -> Result<SearchResult> {
    Ok(grid_search(space, data, cfg)?)
}
