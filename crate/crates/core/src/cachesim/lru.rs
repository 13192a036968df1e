use std::collections::{BTreeMap, HashMap};

/// Fully associative LRU cache over line ids.
#[derive(Debug, Clone)]
pub struct LruCache {
    capacity: usize,
    clock: u64,
    stamp_of: HashMap<u64, u64>,
    by_stamp: BTreeMap<u64, u64>,
}

impl LruCache {
    pub fn new(capacity: usize) -> Self {
        LruCache {
            capacity,
            clock: 0,
            stamp_of: HashMap::new(),
            by_stamp: BTreeMap::new(),
        }
    }

    /// Touches `line`; returns true on a hit. A miss loads the line,
    /// evicting the least recently used one when full.
    pub fn access(&mut self, line: u64) -> bool {
        self.clock += 1;
        let now = self.clock;
        if let Some(stamp) = self.stamp_of.insert(line, now) {
            self.by_stamp.remove(&stamp);
            self.by_stamp.insert(now, line);
            return true;
        }
        if self.by_stamp.len() == self.capacity {
            if let Some((_, victim)) = self.by_stamp.pop_first() {
                self.stamp_of.remove(&victim);
            }
        }
        self.by_stamp.insert(now, line);
        false
    }

    pub fn len(&self) -> usize {
        self.stamp_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stamp_of.is_empty()
    }

    pub fn contains(&self, line: u64) -> bool {
        self.stamp_of.contains_key(&line)
    }
}
