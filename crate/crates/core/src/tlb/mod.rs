//! Set-associative sub-entry TLB models.
//!
//! [`SubEntryTlb`] is the conventional organization: one base per entry, LRU
//! replacement, and all sub-entries zeroed when the entry goes. [`StarTlb`]
//! lets an under-used entry host additional bases by shrinking each base's
//! share of the sub-entries and tagging slots with address-identify bits.

mod baseline;
pub mod layout;
mod star;

pub use baseline::{ProbeLatency, SubEntryTlb};
pub use layout::{choose_layout, reconstruct_index, slot_map, BaseRole, Layout3, LayoutMode};
pub use star::{StarConfig, StarEntry, StarTlb};

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::addr::{PageConfig, RequestIdentity, Tick, TlbGeometry};
use crate::metrics::EvictionSample;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SubEntrySlot {
    pub valid: bool,
    pub pfn: u64,
    /// Address-identify bits. Always zero in a non-shared entry.
    pub aib: u8,
    /// Recency stamp of the last fill or hit on this slot.
    pub last_touch: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BaseRecord {
    pub valid: bool,
    /// Stored for format fidelity; traces are read-only so this stays clear.
    pub dirty: bool,
    pub vpb: u64,
    pub owner_pid: u32,
    pub instance_id: u16,
    pub last_access_tick: Tick,
}

impl BaseRecord {
    pub fn new(vpb: u64, who: RequestIdentity, tick: Tick) -> Self {
        Self {
            valid: true,
            dirty: false,
            vpb,
            owner_pid: who.process_id,
            instance_id: who.instance_id,
            last_access_tick: tick,
        }
    }

    pub fn matches(&self, vpb: u64, pid: u32) -> bool {
        self.valid && self.vpb == vpb && self.owner_pid == pid
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LookupKind {
    Hit,
    /// No base in the set matches the request.
    MissNoEntry,
    /// The base matches but the sub-entry is empty.
    MissSubEntry,
    /// The base matches a shared entry but the located slot does not hold this page.
    MissAib,
}

impl LookupKind {
    pub fn is_hit(self) -> bool {
        matches!(self, LookupKind::Hit)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LookupResult {
    pub kind: LookupKind,
    pub pfn: Option<u64>,
    pub latency_cycles: u64,
}

impl LookupResult {
    pub fn hit(pfn: u64, latency_cycles: u64) -> Self {
        Self {
            kind: LookupKind::Hit,
            pfn: Some(pfn),
            latency_cycles,
        }
    }

    pub fn miss(kind: LookupKind, latency_cycles: u64) -> Self {
        Self {
            kind,
            pfn: None,
            latency_cycles,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InsertOutcome {
    /// The page's base was already resident; its slot was filled (or refreshed).
    FilledExisting { way: usize },
    NewEntryVacant { way: usize },
    /// The LRU way was evicted. Shared victims yield one sample per base.
    NewEntryEvicted {
        way: usize,
        samples: Vec<EvictionSample>,
    },
    /// The new base joined an existing entry.
    Shared { way: usize, layout: LayoutMode },
    /// A shared entry whose base ran out of slots dropped its other bases.
    Reverted {
        way: usize,
        samples: Vec<EvictionSample>,
    },
}

impl InsertOutcome {
    pub fn way(&self) -> usize {
        match self {
            InsertOutcome::FilledExisting { way }
            | InsertOutcome::NewEntryVacant { way }
            | InsertOutcome::NewEntryEvicted { way, .. }
            | InsertOutcome::Shared { way, .. }
            | InsertOutcome::Reverted { way, .. } => *way,
        }
    }
}

/// Event counters kept by every TLB model.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TlbCounters {
    pub entry_evictions: u64,
    /// Translations displaced by a same-local-index conflict in a shared entry.
    pub conflict_evictions: u64,
    /// Translations dropped when remapping an entry into a new layout.
    pub layout_conflicts: u64,
    pub shares: u64,
    pub reverts: u64,
    pub promotions: u64,
    pub demotions: u64,
}

/// Common surface of every TLB level used by the hierarchy.
pub trait TranslationBuffer: Send {
    fn geometry(&self) -> TlbGeometry;

    /// Page layout at this level (`region_pages` equals the sub-entry count).
    fn page_config(&self) -> PageConfig;

    fn lookup(&mut self, vaddr: u64, who: RequestIdentity, tick: Tick) -> LookupResult;

    fn insert(&mut self, vaddr: u64, pfn: u64, who: RequestIdentity, tick: Tick) -> InsertOutcome;

    /// Eviction samples recorded since the last call.
    fn take_evictions(&mut self) -> Vec<EvictionSample>;

    fn counters(&self) -> TlbCounters;

    /// Number of valid translations currently held.
    fn resident_translations(&self) -> u64;
}

/// Way ranges an instance may allocate into; `None` means the whole set.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WayPartition {
    ranges: Vec<Range<usize>>,
}

impl WayPartition {
    /// Contiguous way ranges from per-instance way counts, in instance order.
    pub fn from_counts(counts: &[u32]) -> Self {
        let mut start = 0usize;
        let ranges = counts
            .iter()
            .map(|&c| {
                let r = start..start + c as usize;
                start += c as usize;
                r
            })
            .collect();
        Self { ranges }
    }

    pub fn ways_for(&self, instance_id: u16, ways: usize) -> Range<usize> {
        self.ranges
            .get(instance_id as usize)
            .cloned()
            .unwrap_or(0..ways)
    }

    pub fn owner_of(&self, way: usize) -> Option<u16> {
        self.ranges
            .iter()
            .position(|r| r.contains(&way))
            .map(|i| i as u16)
    }
}
