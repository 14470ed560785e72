use std::collections::BTreeMap;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::steps::StepKind;

use super::{EngineError, Result};

/// Which run produced a History entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Hoe,
    Search,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistoryRecord {
    pub acc: f64,
    pub kind: StepKind,
    /// Number of steps in the prefix.
    pub depth: usize,
    pub origin: Origin,
    #[serde(skip)]
    pub elapsed: Duration,
}

/// Which History entries the early-stopping median pools.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MedianScope {
    /// Every entry regardless of depth or step type.
    #[default]
    Pooled,
    /// Only entries with the same prefix depth as the step being judged.
    PerDepth,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Decision {
    Continue,
    Terminate,
}

/// Prefix key to accuracy, written once per key.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct History {
    entries: BTreeMap<String, HistoryRecord>,
    sorted: Vec<f64>,
    by_depth: BTreeMap<usize, Vec<f64>>,
}

fn insert_sorted(v: &mut Vec<f64>, x: f64) {
    let at = v.partition_point(|&y| y <= x);
    v.insert(at, x);
}

/// Median of an ascending slice; even lengths average the middle pair.
fn median_of_sorted(v: &[f64]) -> Option<f64> {
    let n = v.len();
    match n {
        0 => None,
        _ if n % 2 == 1 => Some(v[n / 2]),
        _ => Some((v[n / 2 - 1] + v[n / 2]) / 2.0),
    }
}

impl History {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, key: &str) -> Option<&HistoryRecord> {
        self.entries.get(key)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &HistoryRecord)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Adds a new key. Existing keys are never overwritten.
    pub fn insert(&mut self, key: String, record: HistoryRecord) -> Result<()> {
        if !(0.0..=1.0).contains(&record.acc) {
            return Err(EngineError::InvalidAccuracy(record.acc));
        }
        if self.entries.contains_key(&key) {
            return Err(EngineError::DuplicateKey(key));
        }
        insert_sorted(&mut self.sorted, record.acc);
        insert_sorted(self.by_depth.entry(record.depth).or_default(), record.acc);
        self.entries.insert(key, record);
        Ok(())
    }

    /// Median of every accuracy in History.
    pub fn median(&self) -> Result<f64> {
        median_of_sorted(&self.sorted).ok_or(EngineError::EmptyHistory)
    }

    pub fn median_at_depth(&self, depth: usize) -> Result<f64> {
        self.by_depth.get(&depth).and_then(|v| median_of_sorted(v)).ok_or(EngineError::EmptyHistory)
    }

    pub fn threshold(&self, scope: MedianScope, depth: usize) -> Result<f64> {
        match scope {
            MedianScope::Pooled => self.median(),
            MedianScope::PerDepth => self.median_at_depth(depth),
        }
    }

    pub fn total_elapsed(&self) -> Duration {
        self.entries.values().map(|r| r.elapsed).sum()
    }
}

/// Median of every accuracy in `history`.
pub fn median_threshold(history: &History) -> Result<f64> {
    history.median()
}

/// Continue only when `acc` beats the pooled median strictly.
pub fn early_stop(history: &History, acc: f64) -> Result<Decision> {
    decide(acc, history.median()?)
}

pub fn early_stop_scoped(history: &History, acc: f64, scope: MedianScope, depth: usize) -> Result<Decision> {
    decide(acc, history.threshold(scope, depth)?)
}

fn decide(acc: f64, threshold: f64) -> Result<Decision> {
    Ok(if acc > threshold { Decision::Continue } else { Decision::Terminate })
}

impl Serialize for History {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.entries.serialize(serializer)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rec(acc: f64, depth: usize) -> HistoryRecord {
        HistoryRecord { acc, kind: StepKind::DataStep, depth, origin: Origin::Hoe, elapsed: Duration::ZERO }
    }

    fn history(accs: &[f64]) -> History {
        let mut h = History::new();
        for (i, &a) in accs.iter().enumerate() {
            h.insert(format!("k{i}"), rec(a, 1 + i % 2)).unwrap();
        }
        h
    }

    #[test]
    fn median_examples() {
        assert_eq!(history(&[0.5, 0.7, 0.9]).median().unwrap(), 0.7);
        assert!((history(&[0.6, 0.8]).median().unwrap() - 0.7).abs() < 1e-12);
        assert_eq!(history(&[0.42]).median().unwrap(), 0.42);
        assert!(matches!(History::new().median(), Err(EngineError::EmptyHistory)));
    }

    #[test]
    fn early_stop_examples() {
        let h = history(&[0.6, 0.7, 0.8]);
        assert_eq!(early_stop(&h, 0.72).unwrap(), Decision::Continue);
        assert_eq!(early_stop(&h, 0.70).unwrap(), Decision::Terminate);
        assert_eq!(early_stop(&h, 0.65).unwrap(), Decision::Terminate);
    }

    #[test]
    fn keys_are_write_once() {
        let mut h = history(&[0.5]);
        assert!(matches!(h.insert("k0".into(), rec(0.9, 1)), Err(EngineError::DuplicateKey(_))));
        assert_eq!(h.get("k0").unwrap().acc, 0.5);
        assert!(h.insert("x".into(), rec(1.5, 1)).is_err());
        assert!(h.insert("y".into(), rec(f64::NAN, 1)).is_err());
    }

    #[test]
    fn per_depth_scope() {
        let mut h = History::new();
        h.insert("a".into(), rec(0.9, 1)).unwrap();
        h.insert("b".into(), rec(0.8, 1)).unwrap();
        h.insert("a|c".into(), rec(0.4, 2)).unwrap();
        assert_eq!(h.median().unwrap(), 0.8);
        assert!((h.median_at_depth(1).unwrap() - 0.85).abs() < 1e-12);
        assert_eq!(h.median_at_depth(2).unwrap(), 0.4);
        assert_eq!(early_stop_scoped(&h, 0.5, MedianScope::Pooled, 2).unwrap(), Decision::Terminate);
        assert_eq!(early_stop_scoped(&h, 0.5, MedianScope::PerDepth, 2).unwrap(), Decision::Continue);
        assert!(h.median_at_depth(3).is_err());
    }

    #[test]
    fn serializes_as_key_map_without_timing() {
        let mut h = history(&[0.25]);
        h.entries.get_mut("k0").unwrap().elapsed = Duration::from_secs(3);
        let json = serde_json::to_string(&h).unwrap();
        assert_eq!(json, r#"{"k0":{"acc":0.25,"kind":"data_step","depth":1,"origin":"hoe"}}"#);
    }

    /// Median by counting: for odd n the value with at most n/2 entries on
    /// either side; for even n the mean of the two order statistics found the
    /// same way.
    fn median_by_counting(v: &[f64]) -> f64 {
        let n = v.len();
        let rank = |k: usize| {
            *v.iter()
                .find(|&&x| {
                    let below = v.iter().filter(|&&y| y < x).count();
                    let at_or_below = v.iter().filter(|&&y| y <= x).count();
                    below <= k && k < at_or_below
                })
                .unwrap()
        };
        if n % 2 == 1 {
            rank(n / 2)
        } else {
            (rank(n / 2 - 1) + rank(n / 2)) / 2.0
        }
    }

    proptest! {
        #[test]
        fn median_matches_counting_oracle(accs in prop::collection::vec(0u32..=1000, 1..40)) {
            let accs: Vec<f64> = accs.iter().map(|&a| a as f64 / 1000.0).collect();
            let h = history(&accs);
            prop_assert_eq!(h.median().unwrap().to_bits(), median_by_counting(&accs).to_bits());
        }

        #[test]
        fn continue_iff_strictly_above(accs in prop::collection::vec(0u32..=100, 1..30), probe in 0u32..=100) {
            let accs: Vec<f64> = accs.iter().map(|&a| a as f64 / 100.0).collect();
            let h = history(&accs);
            let acc = probe as f64 / 100.0;
            let want = if acc > median_by_counting(&accs) { Decision::Continue } else { Decision::Terminate };
            prop_assert_eq!(early_stop(&h, acc).unwrap(), want);
        }
    }
}
