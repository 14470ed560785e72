use std::ffi::OsString;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use etop_core::engine::{
    grid_search, search, MedianScope, SearchResult, DEFAULT_CACHE_BUDGET, DEFAULT_PIPELINE_FRACTION, DEFAULT_SAMPLE_SIZE,
};
use etop_core::steps::{SplitCriterion, SurrogateConfig};

use crate::bench::{load_bench_manifest, run_bench};
use crate::config::{Clock, Mode, RunConfig};
use crate::error::{HarnessError, Result, EXIT_OK, EXIT_USAGE};
use crate::gains::{compare, CSV_HEADER};

#[derive(Debug, Parser)]
#[command(name = "etop", version, about = "Pipeline search with history-guided early termination")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the early-terminating search and write the SearchResult JSON.
    Search(RunArgs),
    /// Run every pipeline to completion and write the SearchResult JSON.
    Grid(RunArgs),
    /// Run both on one dataset and write a gains report (JSON plus CSV row).
    Compare {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_enum, default_value_t = Clock::Wall)]
        clock: Clock,
    },
    /// Run `compare` for every entry of a manifest and aggregate.
    Bench {
        #[arg(long)]
        manifest: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum, default_value_t = Clock::Wall)]
        clock: Clock,
    },
}

#[derive(Debug, Args)]
struct RunArgs {
    /// CSV file with a header row.
    #[arg(long)]
    data: PathBuf,
    /// Name of the label column.
    #[arg(long)]
    target: String,
    /// Search space JSON.
    #[arg(long)]
    space: PathBuf,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Args)]
struct CommonArgs {
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_SAMPLE_SIZE)]
    sample_size: usize,
    #[arg(long, default_value_t = DEFAULT_PIPELINE_FRACTION)]
    pipeline_fraction: f64,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = SurrogateConfig::default().max_depth)]
    surrogate_max_depth: usize,
    #[arg(long, default_value_t = SurrogateConfig::default().min_leaf)]
    surrogate_min_leaf: usize,
    /// Bytes of intermediate data to keep cached; 0 disables the data cache.
    #[arg(long, default_value_t = DEFAULT_CACHE_BUDGET)]
    cache_budget: usize,
    #[arg(long, value_enum, default_value_t = ScopeArg::Pooled)]
    median_scope: ScopeArg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScopeArg {
    Pooled,
    PerDepth,
}

impl CommonArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        cfg.sample_size = self.sample_size;
        cfg.pipeline_fraction = self.pipeline_fraction;
        cfg.output_path = self.out.clone();
        cfg.surrogate = SurrogateConfig {
            max_depth: self.surrogate_max_depth,
            min_leaf: self.surrogate_min_leaf,
            split_criterion: SplitCriterion::Gini,
        };
        cfg.cache_data_budget = self.cache_budget;
        cfg.median_scope = match self.median_scope {
            ScopeArg::Pooled => MedianScope::Pooled,
            ScopeArg::PerDepth => MedianScope::PerDepth,
        };
    }
}

impl RunArgs {
    fn config(&self, mode: Mode) -> RunConfig {
        let mut cfg = RunConfig::new(&self.data, &self.target, &self.space, self.common.seed);
        cfg.mode = mode;
        self.common.apply(&mut cfg);
        cfg
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Diagnostics go to standard error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("etop: {e}");
            e.exit_code()
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| HarnessError::Write { path: path.display().to_string(), source })
}

fn emit(out: Option<&Path>, contents: &str) -> Result<()> {
    match out {
        Some(p) => write_file(p, contents),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(contents.as_bytes())
                .and_then(|()| stdout.flush())
                .map_err(|source| HarnessError::Write { path: "standard output".into(), source })
        }
    }
}

/// Companion file next to `out` with extension `ext`; `out` must not already
/// use it.
fn sibling(out: &Path, ext: &str) -> Result<PathBuf> {
    if out.extension().is_some_and(|e| e == ext) {
        return Err(HarnessError::Usage(format!("--out {} would collide with its .{ext} companion", out.display())));
    }
    Ok(out.with_extension(ext))
}

fn dataset_name(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().replace([',', '\n', '"'], "_")).unwrap_or_else(|| "dataset".into())
}

fn finish_search(result: &SearchResult, out: Option<&Path>) -> Result<()> {
    let mut json = result.to_json();
    json.push('\n');
    emit(out, &json)?;
    match &result.winner {
        Some(w) => {
            info!("winner {} acc {:.4}", w.pipeline, w.acc);
            Ok(())
        }
        None => Err(HarnessError::NoWinner(result.diagnostic.clone().unwrap_or_default())),
    }
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Search(args) => {
            let cfg = args.config(Mode::Etop);
            cfg.validate()?;
            let (data, space) = (cfg.load_dataset()?, cfg.load_space()?);
            let result = search(&space, &data, &cfg.search_config())?;
            finish_search(&result, cfg.output_path.as_deref())
        }
        Command::Grid(args) => {
            let cfg = args.config(Mode::Grid);
            cfg.validate()?;
            let (data, space) = (cfg.load_dataset()?, cfg.load_space()?);
            let result = grid_search(&space, &data, &cfg.search_config())?;
            finish_search(&result, cfg.output_path.as_deref())
        }
        Command::Compare { run, clock } => {
            let mut cfg = run.config(Mode::Etop);
            cfg.clock = clock;
            cfg.validate()?;
            let csv_path = cfg.output_path.as_deref().map(|p| sibling(p, "csv")).transpose()?;
            let (data, space) = (cfg.load_dataset()?, cfg.load_space()?);
            let cmp = compare(&dataset_name(&cfg.data_path), &data, &space, &cfg.search_config(), clock)?;
            let csv = format!("{CSV_HEADER}\n{}\n", cmp.report.csv_row());
            let mut json = cmp.report.to_json();
            json.push('\n');
            emit(cfg.output_path.as_deref(), &json)?;
            emit(csv_path.as_deref(), &csv)
        }
        Command::Bench { manifest, common, clock } => {
            let mut cfg = RunConfig::new("", "", "", common.seed);
            common.apply(&mut cfg);
            cfg.clock = clock;
            cfg.validate()?;
            let json_path = cfg.output_path.as_deref().map(|p| sibling(p, "json")).transpose()?;
            let entries = load_bench_manifest(&manifest)?;
            let report = run_bench(&entries, &cfg.search_config(), clock)?;
            eprint!("{}", report.table());
            emit(cfg.output_path.as_deref(), &report.to_csv())?;
            if let Some(p) = json_path {
                let mut json = serde_json::to_string_pretty(&report).expect("reports serialize");
                json.push('\n');
                write_file(&p, &json)?;
            }
            Ok(())
        }
    }
}
