//! Acceptance suite. Runs without the libtest harness so that every
//! criterion prints exactly one PASS/FAIL line regardless of capture flags.
//! The process exits non-zero if any criterion fails.

mod common;

use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::{code, data, etop, SMALL_SPACE};
use etop_core::engine::{
    build_history, early_stop, grid_search, search, Decision, Executor, History, HistoryRecord, Origin, Pipeline,
    PipelineStatus, SearchConfig, SearchSpace,
};
use etop_core::steps::{surrogate_score, StepKind, SurrogateConfig};
use etop_core::tabular::{load_csv, split_train_valid, stratified_sample, Cell, Column, Dataset};
use etop_harness::{accuracy_gain_pp, compare, time_gain_factor, Clock, EXIT_OK};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use sha2::{Digest, Sha256};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---------------------------------------------------------------- 1

const ACC_TOL: f64 = 1e-9;
const TIME_TOL: f64 = 1e-3;

fn gains_formulas() -> Check {
    let acc = accuracy_gain_pp(83.42, 81.54);
    let time = time_gain_factor(1804.65, 496.35).map_err(|e| e.to_string())?;
    ensure((acc - 1.88).abs() <= ACC_TOL, || format!("acc_gain_pp = {acc}, want 1.88 within {ACC_TOL}"))?;
    ensure((time - 3.636).abs() <= TIME_TOL, || format!("time_gain_factor = {time}, want 3.636 within {TIME_TOL}"))?;
    Ok(format!("acc_gain_pp = {acc:.10}, time_gain_factor = {time:.6}"))
}

// ---------------------------------------------------------------- 2

/// k-th order statistic by counting, with no sorting.
fn order_stat(values: &[f64], k: usize) -> f64 {
    *values
        .iter()
        .find(|&&v| {
            let below = values.iter().filter(|&&w| w < v).count();
            let at_most = values.iter().filter(|&&w| w <= v).count();
            below <= k && k < at_most
        })
        .expect("some value holds every rank")
}

fn oracle_median(values: &[f64]) -> f64 {
    let n = values.len();
    if n % 2 == 1 {
        order_stat(values, n / 2)
    } else {
        (order_stat(values, n / 2 - 1) + order_stat(values, n / 2)) / 2.0
    }
}

fn history_of(values: &[f64]) -> History {
    let mut h = History::new();
    for (i, &acc) in values.iter().enumerate() {
        let record = HistoryRecord { acc, kind: StepKind::DataStep, depth: 1, origin: Origin::Hoe, elapsed: Duration::ZERO };
        h.insert(format!("k{i}"), record).unwrap();
    }
    h
}

fn early_stop_conformance() -> Check {
    let histories: [&[f64]; 9] = [
        &[0.5],
        &[0.4, 0.8],
        &[0.9, 0.1, 0.5],
        &[0.7, 0.7, 0.7, 0.7],
        &[0.25, 0.75, 0.5, 1.0, 0.0],
        &[0.6, 0.6, 0.2, 0.9, 0.6, 0.3],
        &[0.81, 0.33, 0.57, 0.57, 0.92, 0.11, 0.64],
        &[0.3, 0.5, 0.5, 0.3, 0.5, 0.3, 0.5],
        &[0.0, 1.0, 0.0, 1.0, 0.0, 1.0],
    ];
    let mut checked = 0;
    let mut equality_cases = 0;
    for values in histories {
        let h = history_of(values);
        let m = oracle_median(values);
        let mut probes: Vec<f64> = values.to_vec();
        probes.extend([m, m - 1e-9, m + 1e-9, 0.0, 1.0]);
        probes.retain(|p| (0.0..=1.0).contains(p));
        for acc in probes {
            let want = if acc > m { Decision::Continue } else { Decision::Terminate };
            let got = early_stop(&h, acc).map_err(|e| e.to_string())?;
            ensure(got == want, || format!("history {values:?}, acc {acc}: got {got:?}, oracle median {m} says {want:?}"))?;
            checked += 1;
            if acc == m {
                equality_cases += 1;
            }
        }
    }
    ensure(equality_cases >= 9, || format!("only {equality_cases} equality probes"))?;
    Ok(format!("{checked} probes over sizes 1-7, {equality_cases} at the median terminate"))
}

// ---------------------------------------------------------------- 3

fn cache_soundness() -> Check {
    let raw = load_csv(data("blobs.csv"), "label", None).map_err(|e| e.to_string())?;
    ensure(raw.n_rows() == 500, || format!("blobs has {} rows", raw.n_rows()))?;
    let space = SearchSpace::from_json(SMALL_SPACE).map_err(|e| e.to_string())?;
    ensure(space.slots().len() == 3 && space.n_pipelines() >= 24, || "space is not 3-slot with >= 24 pipelines".into())?;
    let mut cfg = SearchConfig::new(3);
    let cached = search(&space, &raw, &cfg).map_err(|e| e.to_string())?;
    cfg.cache_budget = 0;
    let uncached = search(&space, &raw, &cfg).map_err(|e| e.to_string())?;
    ensure(cached.winner.is_some(), || "seed 3 produced no winner".into())?;
    let (a, b) = (cached.to_json(), uncached.to_json());
    ensure(a.as_bytes() == b.as_bytes(), || "serialized results differ".into())?;
    ensure(cached.stats.transform_replays < uncached.stats.transform_replays, || {
        format!("replays {} vs {}: cache never engaged", cached.stats.transform_replays, uncached.stats.transform_replays)
    })?;
    Ok(format!(
        "{} bytes identical; replays {} cached vs {} uncached",
        a.len(),
        cached.stats.transform_replays,
        uncached.stats.transform_replays
    ))
}

// ---------------------------------------------------------------- 4

const BUNDLED: [(&str, &str); 3] = [("blobs.csv", "label"), ("loans.csv", "approved"), ("sensors.csv", "status")];

fn work_bound() -> Check {
    let space = SearchSpace::load(data("space_default.json")).map_err(|e| e.to_string())?;
    let mut notes = Vec::new();
    for (file, target) in BUNDLED {
        let raw = load_csv(data(file), target, None).map_err(|e| e.to_string())?;
        for seed in 1..=3u64 {
            let cfg = SearchConfig::new(seed);
            let e = search(&space, &raw, &cfg).map_err(|e| e.to_string())?;
            let g = grid_search(&space, &raw, &cfg).map_err(|e| e.to_string())?;
            let (se, sg) = (e.total_step_executions, g.total_step_executions);
            ensure(se <= sg, || format!("{file} seed {seed}: etop {se} > grid {sg}"))?;
            let terminated = e.outcomes.iter().any(|o| matches!(o.status, PipelineStatus::TerminatedAt { .. }));
            if terminated {
                ensure(se < sg, || format!("{file} seed {seed}: terminations but etop {se} == grid {sg}"))?;
            }
            notes.push(format!("{}/{seed} {se}<{sg}", file.trim_end_matches(".csv")));
        }
    }
    Ok(notes.join(", "))
}

// ---------------------------------------------------------------- 5

/// Three classes separated along two informative columns, plus three
/// high-variance noise columns that carry no label information. One row in
/// ten loses a cell so that the imputation slot has work to do.
fn pruning_dataset(seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let signal = Normal::<f64>::new(0.0, 1.0).unwrap();
    let noise = Normal::<f64>::new(0.0, 50.0).unwrap();
    let centres = [(0.0, 0.0), (2.5, 0.5), (1.0, 2.5)];
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for i in 0..1500 {
        let c = i % 3;
        let (cx, cy) = centres[c];
        let mut row = vec![Cell::Num(cx + signal.sample(&mut rng)), Cell::Num(cy + signal.sample(&mut rng))];
        row.extend((0..3).map(|_| Cell::Num(noise.sample(&mut rng))));
        if rng.gen_bool(0.1) {
            let j = rng.gen_range(0..row.len());
            row[j] = Cell::Missing;
        }
        rows.push(row);
        labels.push(format!("c{c}"));
    }
    let cols = ["s1", "s2", "n1", "n2", "n3"].map(Column::numeric).to_vec();
    Dataset::new(cols, rows, labels).unwrap()
}

/// 432 pipelines, the size of the reference space. Variance selection keeps
/// only noise columns, so half of the selection choices discard all label
/// signal; ANOVA selection keeps informative columns first.
const PRUNING_SPACE: &str = r#"{"slots": [
  [{"name": "impute", "params": {"strategy": "mean"}}, {"name": "impute", "params": {"strategy": "median"}},
   {"name": "impute", "params": {"strategy": "mode"}}, {"name": "impute", "params": {"strategy": "constant_zero"}}],
  [{"name": "select", "params": {"method": "variance", "k": 1}}, {"name": "select", "params": {"method": "variance", "k": 2}},
   {"name": "select", "params": {"method": "variance", "k": 3}},
   {"name": "select", "params": {"method": "anova_f", "k": 1}}, {"name": "select", "params": {"method": "anova_f", "k": 2}},
   {"name": "select", "params": {"method": "anova_f", "k": 3}}],
  [{"name": "scale", "params": {"kind": "standard"}}, {"name": "scale", "params": {"kind": "minmax"}},
   {"name": "scale", "params": {"kind": "none"}}],
  [{"name": "dtree", "params": {"max_depth": 4, "min_leaf": 2}}, {"name": "dtree", "params": {"max_depth": 8, "min_leaf": 1}},
   {"name": "knn", "params": {"k": 5}}, {"name": "knn", "params": {"k": 15}},
   {"name": "logreg", "params": {"lr": 0.1, "epochs": 200, "l2": 0.001}},
   {"name": "rforest", "params": {"n_trees": 15, "max_depth": 6}}]
]}"#;

const MAX_COMPLETED_SHARE: f64 = 0.5;
const MAX_HOLDOUT_GAP_PP: f64 = 2.0;

fn pruning_analogue() -> Check {
    let space = SearchSpace::from_json(PRUNING_SPACE).map_err(|e| e.to_string())?;
    let mut notes = Vec::new();
    for seed in 1..=3u64 {
        let d = pruning_dataset(seed);
        let c = compare("pruning", &d, &space, &SearchConfig::new(seed), Clock::Work).map_err(|e| format!("seed {seed}: {e}"))?;
        let r = &c.report;
        let share = r.pipelines_completed_etop as f64 / r.pipelines_total as f64;
        ensure(share <= MAX_COMPLETED_SHARE, || {
            format!("seed {seed}: completed {}/{} > {MAX_COMPLETED_SHARE}", r.pipelines_completed_etop, r.pipelines_total)
        })?;
        ensure(r.acc_gain_pp.abs() <= MAX_HOLDOUT_GAP_PP, || {
            format!("seed {seed}: holdout etop {:.4} vs grid {:.4} differ by {:.3} pp", r.etop_acc, r.grid_acc, r.acc_gain_pp)
        })?;
        notes.push(format!(
            "seed {seed}: {}/{} completed, gap {:+.2} pp",
            r.pipelines_completed_etop, r.pipelines_total, r.acc_gain_pp
        ));
    }
    Ok(notes.join("; "))
}

// ---------------------------------------------------------------- 6

/// Largest-remainder apportionment of `n` over `counts`.
fn largest_remainder(counts: &[usize], n: usize) -> Vec<usize> {
    let total: usize = counts.iter().sum();
    let exact: Vec<f64> = counts.iter().map(|&c| n as f64 * c as f64 / total as f64).collect();
    let mut quotas: Vec<usize> = exact.iter().map(|q| q.floor() as usize).collect();
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())));
    let short = n - quotas.iter().sum::<usize>();
    for &i in order.iter().take(short) {
        quotas[i] += 1;
    }
    quotas
}

fn sampling_fidelity() -> Check {
    let sizes = [6000usize, 3000, 1000];
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (c, &n) in sizes.iter().enumerate() {
        for _ in 0..n {
            rows.push(vec![Cell::Num(rows.len() as f64)]);
            labels.push(format!("k{c}"));
        }
    }
    // interleave classes so that row order carries no class structure
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(0));
    let rows: Vec<_> = order.iter().map(|&i| rows[i].clone()).collect();
    let labels: Vec<_> = order.iter().map(|&i| labels[i].clone()).collect();
    let d = Dataset::new(vec![Column::numeric("id")], rows, labels).map_err(|e| e.to_string())?;
    let quotas = largest_remainder(&sizes, 5000);
    for seed in 0..20u64 {
        let s = stratified_sample(&d, 5000, seed).map_err(|e| e.to_string())?;
        let freq = s.class_frequencies();
        for (c, &q) in quotas.iter().enumerate() {
            let have = freq.get(format!("k{c}").as_str()).copied().unwrap_or(0);
            ensure(have.abs_diff(q) <= 1, || format!("seed {seed} class k{c}: {have} vs quota {q}"))?;
        }
    }
    Ok(format!("20 seeds within 1 of quotas {quotas:?}"))
}

// ---------------------------------------------------------------- 7

fn hoe_structure() -> Check {
    let raw = load_csv(data("loans.csv"), "approved", None).map_err(|e| e.to_string())?;
    let a: Pipeline = "impute{strategy=median}|encode{kind=onehot}|knn{k=5}".parse().map_err(|e| format!("{e}"))?;
    let b: Pipeline = "impute{strategy=median}|encode{kind=onehot}|dtree{max_depth=4,min_leaf=2}"
        .parse()
        .map_err(|e| format!("{e}"))?;
    let surrogate = SurrogateConfig::default();
    let mut ex = Executor::new(raw.clone(), &surrogate, 1);
    for p in [&a, &b] {
        ex.walk(p, Origin::Hoe, false).map_err(|e| e.to_string())?;
    }
    let shared = &a.prefix_keys()[..2];
    for key in shared {
        let n = ex.executions().get(key).copied().unwrap_or(0);
        ensure(n == 1, || format!("{key} executed {n} times"))?;
    }
    ensure(ex.total_executions() == 4, || format!("{} executions, want 4", ex.total_executions()))?;
    let h = build_history(&[a, b], &raw, &surrogate, 1).map_err(|e| e.to_string())?;
    ensure(h.len() == 4, || format!("build_history recorded {} keys", h.len()))?;
    ensure(
        serde_json::to_string(&h).unwrap() == serde_json::to_string(ex.history()).unwrap(),
        || "build_history disagrees with the counted walk".into(),
    )?;
    Ok(format!("{} and {} executed once each", shared[0], shared[1]))
}

// ---------------------------------------------------------------- 8

fn determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let blobs = data("blobs.csv");
    let space = data("space_default.json");
    let mut digests = Vec::new();
    for run in 0..2 {
        let out = dir.path().join(format!("run{run}.json"));
        let args = [
            "compare", "--data", blobs.to_str().unwrap(), "--target", "label", "--space", space.to_str().unwrap(),
            "--seed", "1", "--clock", "work", "--out", out.to_str().unwrap(),
        ];
        let r = etop(&args);
        ensure(code(&r) == EXIT_OK, || format!("run {run} exited {}: {}", code(&r), String::from_utf8_lossy(&r.stderr)))?;
        let mut h = Sha256::new();
        h.update(fs::read(&out).map_err(|e| e.to_string())?);
        h.update(fs::read(out.with_extension("csv")).map_err(|e| e.to_string())?);
        digests.push(h.finalize().iter().map(|b| format!("{b:02x}")).collect::<String>());
    }
    ensure(digests[0] == digests[1], || format!("digests differ: {} vs {}", digests[0], digests[1]))?;
    Ok(format!("sha256 {}", &digests[0][..16]))
}

// ---------------------------------------------------------------- 9

/// Two classes far apart on both axes of the plane.
fn separable_blobs(seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = Normal::<f64>::new(0.0, 0.5).unwrap();
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for i in 0..200 {
        let c = i % 2;
        let centre = if c == 0 { -3.0 } else { 3.0 };
        rows.push(vec![Cell::Num(centre + n.sample(&mut rng)), Cell::Num(centre + n.sample(&mut rng))]);
        labels.push(format!("b{c}"));
    }
    Dataset::new(vec![Column::numeric("x"), Column::numeric("y")], rows, labels).unwrap()
}

fn points(d: &Dataset) -> Vec<(f64, f64)> {
    (0..d.n_rows()).map(|r| (d.row(r)[0].as_num().unwrap(), d.row(r)[1].as_num().unwrap())).collect()
}

/// Some axis threshold splits the classes exactly.
fn threshold_separable(d: &Dataset) -> bool {
    let pts = points(d);
    let labels = d.labels();
    (0..2).any(|axis| {
        let coord = |i: usize| if axis == 0 { pts[i].0 } else { pts[i].1 };
        (0..pts.len()).any(|t| {
            let cut = coord(t);
            let side = |i: usize| coord(i) <= cut;
            let left: Vec<&String> = (0..pts.len()).filter(|&i| side(i)).map(|i| &labels[i]).collect();
            let right: Vec<&String> = (0..pts.len()).filter(|&i| !side(i)).map(|i| &labels[i]).collect();
            let pure = |v: &[&String]| v.windows(2).all(|w| w[0] == w[1]);
            !left.is_empty() && !right.is_empty() && pure(&left) && pure(&right) && left[0] != right[0]
        })
    })
}

/// Every query's nearest training point carries the query's label.
fn nn_consistent(train: &Dataset, query: &Dataset) -> bool {
    let tp = points(train);
    let qp = points(query);
    qp.iter().zip(query.labels()).all(|(q, label)| {
        let nearest = (0..tp.len())
            .min_by(|&a, &b| {
                let da = (tp[a].0 - q.0).powi(2) + (tp[a].1 - q.1).powi(2);
                let db = (tp[b].0 - q.0).powi(2) + (tp[b].1 - q.1).powi(2);
                da.total_cmp(&db)
            })
            .unwrap();
        &train.labels()[nearest] == label
    })
}

fn ln_choose(n: u64, k: u64) -> f64 {
    (1..=k).map(|i| ((n - k + i) as f64).ln() - (i as f64).ln()).sum()
}

/// Exact two-sided binomial acceptance region `[lo, hi]` for `Bin(n, p)` at
/// level `alpha`, split evenly between the tails.
fn binomial_bounds(n: u64, p: f64, alpha: f64) -> (u64, u64) {
    let pmf: Vec<f64> =
        (0..=n).map(|k| (ln_choose(n, k) + k as f64 * p.ln() + (n - k) as f64 * (1.0 - p).ln()).exp()).collect();
    let mut lo = 0;
    let mut tail = 0.0;
    while tail + pmf[lo as usize] <= alpha / 2.0 {
        tail += pmf[lo as usize];
        lo += 1;
    }
    let mut hi = n;
    let mut tail = 0.0;
    while tail + pmf[hi as usize] <= alpha / 2.0 {
        tail += pmf[hi as usize];
        hi -= 1;
    }
    (lo, hi)
}

const CHANCE_SEEDS: u64 = 30;
const CHANCE_CONFIDENCE: f64 = 0.99;

fn learner_sanity() -> Check {
    for seed in 0..3u64 {
        let d = separable_blobs(seed);
        let split = split_train_valid(&d, 0.25, seed).map_err(|e| e.to_string())?;
        ensure(threshold_separable(&d), || format!("seed {seed}: toy blobs not threshold-separable"))?;
        ensure(nn_consistent(&split.train, &split.valid), || format!("seed {seed}: nearest-neighbour oracle disagrees"))?;
        for model in ["dtree{max_depth=4,min_leaf=1}", "knn{k=1}", "knn{k=5}"] {
            let p: Pipeline = model.parse().map_err(|e| format!("{e}"))?;
            let fitted = p.fit(&split.train, seed).map_err(|e| e.to_string())?;
            for (part, set) in [("train", &split.train), ("holdout", &split.valid)] {
                let acc = fitted.score(set).map_err(|e| e.to_string())?;
                ensure(acc == 1.0, || format!("seed {seed}: {model} {part} accuracy {acc}"))?;
            }
        }
    }

    // label-shuffled data: the surrogate's validation hits are Bin(m, 1/2)
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let unit = Normal::<f64>::new(0.0, 1.0).unwrap();
    let rows: Vec<Vec<Cell>> = (0..600).map(|_| (0..4).map(|_| Cell::Num(unit.sample(&mut rng))).collect()).collect();
    let cols = ["a", "b", "c", "d"].map(Column::numeric).to_vec();
    let alpha = (1.0 - CHANCE_CONFIDENCE) / CHANCE_SEEDS as f64;
    let mut worst = (f64::NAN, 0.0f64);
    let mut bounds = (0, 0);
    for seed in 0..CHANCE_SEEDS {
        let mut labels: Vec<String> = (0..rows.len()).map(|i| format!("y{}", i % 2)).collect();
        labels.shuffle(&mut ChaCha8Rng::seed_from_u64(1000 + seed));
        let d = Dataset::new(cols.clone(), rows.clone(), labels).map_err(|e| e.to_string())?;
        let m = split_train_valid(&d, etop_core::tabular::DEFAULT_VALID_FRACTION, seed).map_err(|e| e.to_string())?.valid.n_rows();
        bounds = binomial_bounds(m as u64, 0.5, alpha);
        let acc = surrogate_score(&d, &SurrogateConfig::default(), seed).map_err(|e| e.to_string())?;
        let hits = (acc * m as f64).round() as u64;
        ensure(bounds.0 <= hits && hits <= bounds.1, || {
            format!("seed {seed}: {hits}/{m} correct outside chance bounds {bounds:?}")
        })?;
        let dev = (acc - 0.5).abs();
        if worst.0.is_nan() || dev > worst.1 {
            worst = (acc, dev);
        }
    }
    Ok(format!(
        "dtree/knn 1.0 on toy blobs; shuffled-label surrogate within {bounds:?} hits (worst acc {:.3})",
        worst.0
    ))
}

// ----------------------------------------------------------------

fn main() {
    let criteria: [(&str, fn() -> Check); 9] = [
        ("gains formulas", gains_formulas),
        ("early-stop median conformance", early_stop_conformance),
        ("prefix-cache soundness", cache_soundness),
        ("work bound", work_bound),
        ("pruning analogue", pruning_analogue),
        ("sampling fidelity", sampling_fidelity),
        ("HoE shared-prefix structure", hoe_structure),
        ("compare determinism", determinism),
        ("learner sanity", learner_sanity),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("acceptance {}: PASS {name} ({secs:.1}s) {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("acceptance {}: FAIL {name} ({secs:.1}s) {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
