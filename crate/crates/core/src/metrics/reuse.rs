//! Exact reuse distance over a stream of `(pid, page)` translations.
//!
//! Each key's most recent access time is marked in a Fenwick tree; the
//! distance of a reuse is the number of marks strictly between the previous
//! access and now, i.e. the number of distinct keys touched in between.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReuseEvent {
    pub pid: u32,
    pub page: u64,
    pub distance: u64,
}

#[derive(Debug, Clone, Default)]
struct Fenwick {
    tree: Vec<i64>,
}

impl Fenwick {
    fn with_len(n: usize) -> Self {
        Self {
            tree: vec![0; n + 1],
        }
    }

    fn len(&self) -> usize {
        self.tree.len() - 1
    }

    fn add(&mut self, pos: usize, delta: i64) {
        let mut i = pos + 1;
        while i < self.tree.len() {
            self.tree[i] += delta;
            i += i & i.wrapping_neg();
        }
    }

    /// Sum over `[0, pos)`.
    fn prefix(&self, pos: usize) -> i64 {
        let mut i = pos;
        let mut s = 0;
        while i > 0 {
            s += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        s
    }
}

/// Streaming reuse-distance calculator.
#[derive(Debug, Clone)]
pub struct ReuseTracker {
    last: HashMap<(u32, u64), usize>,
    marks: Fenwick,
    now: usize,
    /// Pages per key; `0` keys by page, `4` by 16-page region.
    granularity_shift: u32,
}

impl Default for ReuseTracker {
    fn default() -> Self {
        Self::new(0)
    }
}

impl ReuseTracker {
    pub fn new(granularity_shift: u32) -> Self {
        Self {
            last: HashMap::new(),
            marks: Fenwick::with_len(1024),
            now: 0,
            granularity_shift,
        }
    }

    fn grow(&mut self) {
        let mut marks = Fenwick::with_len(self.marks.len() * 2);
        for &t in self.last.values() {
            marks.add(t, 1);
        }
        self.marks = marks;
    }

    /// Record an access; returns the reuse distance unless this is the first
    /// access to the key.
    pub fn access(&mut self, pid: u32, page: u64) -> Option<u64> {
        if self.now >= self.marks.len() {
            self.grow();
        }
        let key = (pid, page >> self.granularity_shift);
        let t = self.now;
        self.now += 1;
        let prev = self.last.insert(key, t);
        let dist = prev.map(|p| {
            let between = self.marks.prefix(t) - self.marks.prefix(p + 1);
            self.marks.add(p, -1);
            between as u64
        });
        self.marks.add(t, 1);
        dist
    }
}

/// Reuse events for every non-first access in `events`.
pub fn reuse_distance_stream(events: &[(u32, u64)]) -> Vec<ReuseEvent> {
    let mut tracker = ReuseTracker::default();
    events
        .iter()
        .filter_map(|&(pid, page)| {
            tracker
                .access(pid, page)
                .map(|distance| ReuseEvent { pid, page, distance })
        })
        .collect()
}

/// Distance histogram with an exact CDF.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReuseHistogram {
    pub counts: BTreeMap<u64, u64>,
}

impl ReuseHistogram {
    pub fn record(&mut self, distance: u64) {
        *self.counts.entry(distance).or_default() += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    /// `(distance, cumulative fraction)` at every distinct distance.
    pub fn cdf(&self) -> Vec<(u64, f64)> {
        let n = self.total() as f64;
        let mut acc = 0;
        self.counts
            .iter()
            .map(|(&d, &c)| {
                acc += c;
                (d, acc as f64 / n)
            })
            .collect()
    }

    /// Fraction of reuses with distance below `capacity`.
    pub fn fraction_below(&self, capacity: u64) -> Option<f64> {
        let n = self.total();
        (n > 0).then(|| self.counts.range(..capacity).map(|(_, c)| c).sum::<u64>() as f64 / n as f64)
    }
}
