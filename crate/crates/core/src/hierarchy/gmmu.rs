use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::addr::Tick;

use super::PageKey;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GmmuConfig {
    pub walkers_per_gpc: usize,
    pub levels: u32,
    pub level_latency: u64,
    pub walk_cache_entries: usize,
}

impl Default for GmmuConfig {
    fn default() -> Self {
        Self {
            walkers_per_gpc: 8,
            levels: 4,
            level_latency: 100,
            walk_cache_entries: 128,
        }
    }
}

/// Small LRU set of walked page numbers.
#[derive(Debug, Clone)]
struct WalkCache {
    entries: Vec<(PageKey, u64)>,
    capacity: usize,
    clock: u64,
}

impl WalkCache {
    fn new(capacity: usize) -> Self {
        Self {
            entries: Vec::with_capacity(capacity),
            capacity,
            clock: 0,
        }
    }

    fn probe(&mut self, key: &PageKey) -> bool {
        self.clock += 1;
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(e) => {
                e.1 = self.clock;
                true
            }
            None => false,
        }
    }

    fn insert(&mut self, key: PageKey) {
        if self.capacity == 0 || self.probe(&key) {
            return;
        }
        if self.entries.len() < self.capacity {
            self.entries.push((key, self.clock));
        } else {
            let victim = self
                .entries
                .iter()
                .enumerate()
                .min_by_key(|(i, (_, stamp))| (*stamp, *i))
                .map(|(i, _)| i)
                .expect("nonempty");
            self.entries[victim] = (key, self.clock);
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GmmuCounters {
    pub walks_requested: u64,
    pub walks_completed: u64,
    pub walk_cache_hits: u64,
    pub queued_walks: u64,
    pub queue_cycles: u64,
}

/// Page-table walkers of one GPC with a FIFO queue and a walk cache.
///
/// A walk-cache hit charges only the last level; a miss charges every level.
#[derive(Debug, Clone)]
pub struct Gmmu {
    cfg: GmmuConfig,
    busy: usize,
    queue: VecDeque<(PageKey, Tick)>,
    cache: WalkCache,
    counters: GmmuCounters,
}

impl Gmmu {
    pub fn new(cfg: GmmuConfig) -> Self {
        Self {
            cfg,
            busy: 0,
            queue: VecDeque::new(),
            cache: WalkCache::new(cfg.walk_cache_entries),
            counters: GmmuCounters::default(),
        }
    }

    pub fn counters(&self) -> GmmuCounters {
        self.counters
    }

    pub fn in_flight(&self) -> usize {
        self.busy
    }

    pub fn queued(&self) -> usize {
        self.queue.len()
    }

    /// Latency of a walk for `key` started now.
    fn start(&mut self, key: &PageKey) -> u64 {
        self.busy += 1;
        if self.cache.probe(key) {
            self.counters.walk_cache_hits += 1;
            self.cfg.level_latency
        } else {
            self.cfg.levels as u64 * self.cfg.level_latency
        }
    }

    /// Ask for a walk. Returns the completion tick if a walker was free,
    /// otherwise the walk waits in the queue.
    pub fn request(&mut self, key: PageKey, now: Tick) -> Option<Tick> {
        self.counters.walks_requested += 1;
        if self.busy < self.cfg.walkers_per_gpc {
            Some(now + self.start(&key))
        } else {
            self.counters.queued_walks += 1;
            self.queue.push_back((key, now));
            None
        }
    }

    /// Finish the walk for `key`. Starts the next queued walk, if any, and
    /// returns it with its completion tick.
    pub fn complete(&mut self, key: PageKey, now: Tick) -> Option<(PageKey, Tick)> {
        debug_assert!(self.busy > 0);
        self.busy -= 1;
        self.counters.walks_completed += 1;
        self.cache.insert(key);
        let (next, queued_at) = self.queue.pop_front()?;
        self.counters.queue_cycles += now - queued_at;
        let lat = self.start(&next);
        Some((next, now + lat))
    }
}
