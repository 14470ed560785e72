//! Command-line harness around `etop-core`: the grid baseline, accuracy and
//! time gains against it, and a manifest-driven benchmark.

pub mod baseline;
pub mod bench;
pub mod cli;
pub mod config;
pub mod error;
pub mod gains;

pub use baseline::run_grid_baseline;
pub use bench::{load_bench_manifest, run_bench, Aggregate, BenchEntry, BenchReport};
pub use config::{Clock, Mode, RunConfig};
pub use error::{HarnessError, EXIT_DATA, EXIT_NO_WINNER, EXIT_OK, EXIT_USAGE};
pub use gains::{
    accuracy_gain_pp, compare, compute_gains, holdout_accuracy, time_gain_factor, Comparison, GainsReport,
    TimedResult, CSV_HEADER, HOLDOUT_FRACTION,
};
