use std::collections::HashMap;
use std::sync::Arc;

use crate::tabular::Dataset;

/// Default byte budget for cached intermediate datasets.
pub const DEFAULT_CACHE_BUDGET: usize = 256 << 20;

/// Least-recently-used store of transformed datasets keyed by prefix.
///
/// Only affects speed: a miss is served by replaying transforms from the
/// nearest cached ancestor. A budget of zero disables caching.
#[derive(Debug, Default)]
pub struct DataCache {
    budget: usize,
    used: usize,
    tick: u64,
    entries: HashMap<String, Slot>,
}

#[derive(Debug)]
struct Slot {
    data: Arc<Dataset>,
    bytes: usize,
    last_used: u64,
}

impl DataCache {
    pub fn new(budget: usize) -> Self {
        DataCache { budget, ..Self::default() }
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn used(&self) -> usize {
        self.used
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&mut self, key: &str) -> Option<Arc<Dataset>> {
        self.tick += 1;
        let tick = self.tick;
        self.entries.get_mut(key).map(|slot| {
            slot.last_used = tick;
            Arc::clone(&slot.data)
        })
    }

    /// Stores `data` unless it alone exceeds the budget, evicting the least
    /// recently used entries to make room.
    pub fn put(&mut self, key: &str, data: Arc<Dataset>) {
        let bytes = data.approx_bytes();
        if bytes > self.budget {
            return;
        }
        if let Some(old) = self.entries.remove(key) {
            self.used -= old.bytes;
        }
        while self.used + bytes > self.budget {
            let victim = self
                .entries
                .iter()
                .min_by_key(|(_, s)| s.last_used)
                .map(|(k, _)| k.clone())
                .expect("used bytes imply an entry");
            let slot = self.entries.remove(&victim).expect("victim present");
            self.used -= slot.bytes;
        }
        self.tick += 1;
        self.used += bytes;
        self.entries.insert(key.to_string(), Slot { data, bytes, last_used: self.tick });
    }
}
