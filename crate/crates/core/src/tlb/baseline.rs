use crate::addr::{decompose, DecomposedAddress, PageConfig, RequestIdentity, Tick, TlbGeometry};
use crate::metrics::EvictionSample;

use super::{
    BaseRecord, InsertOutcome, LookupKind, LookupResult, SubEntrySlot, TlbCounters,
    TranslationBuffer, WayPartition,
};

/// How a probe is charged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProbeLatency {
    /// Every way compared at once: one lookup latency per probe.
    #[default]
    Parallel,
    /// Only half the ways have comparators. A probe that is not resolved in
    /// the first half pays a second round.
    TwoPhase,
}

#[derive(Debug, Clone)]
struct Entry {
    base: BaseRecord,
    slots: Vec<SubEntrySlot>,
    stamp: u64,
}

impl Entry {
    fn vacant(sub: usize) -> Self {
        Self {
            base: BaseRecord::default(),
            slots: vec![SubEntrySlot::default(); sub],
            stamp: 0,
        }
    }

    fn utilized(&self) -> u32 {
        self.slots.iter().filter(|s| s.valid).count() as u32
    }
}

/// Conventional sub-entry TLB: one base per entry, LRU over ways.
///
/// With `subentries_per_entry == 1` this is a plain page-granular TLB (the L1).
#[derive(Debug, Clone)]
pub struct SubEntryTlb {
    geom: TlbGeometry,
    page: PageConfig,
    entries: Vec<Entry>,
    probe: ProbeLatency,
    partition: Option<WayPartition>,
    clock: u64,
    evictions: Vec<EvictionSample>,
    counters: TlbCounters,
}

impl SubEntryTlb {
    pub fn new(geom: TlbGeometry, page: PageConfig) -> Self {
        let n = geom.entries() as usize;
        let sub = geom.subentries_per_entry as usize;
        Self {
            geom,
            page: geom.page_config(page),
            entries: vec![Entry::vacant(sub); n],
            probe: ProbeLatency::Parallel,
            partition: None,
            clock: 0,
            evictions: Vec::new(),
            counters: TlbCounters::default(),
        }
    }

    pub fn with_probe_latency(mut self, probe: ProbeLatency) -> Self {
        self.probe = probe;
        self
    }

    /// Confine each instance's allocations to its own ways.
    pub fn with_partition(mut self, partition: WayPartition) -> Self {
        self.partition = Some(partition);
        self
    }

    pub fn decompose(&self, vaddr: u64) -> DecomposedAddress {
        decompose(vaddr, self.page, &self.geom)
    }

    fn set_range(&self, set: u32) -> std::ops::Range<usize> {
        let w = self.geom.ways as usize;
        let start = set as usize * w;
        start..start + w
    }

    fn find(&self, d: &DecomposedAddress, pid: u32) -> Option<usize> {
        self.set_range(d.set_index)
            .find(|&i| self.entries[i].base.matches(d.vpb, pid))
    }

    fn probe_cost(&self, way: Option<usize>) -> u64 {
        let base = self.geom.lookup_latency_cycles;
        match (self.probe, way) {
            (ProbeLatency::Parallel, _) => base,
            (ProbeLatency::TwoPhase, Some(w)) if w < self.geom.ways as usize / 2 => base,
            (ProbeLatency::TwoPhase, _) => 2 * base,
        }
    }

    fn touch(&mut self, idx: usize, tick: Tick) {
        self.clock += 1;
        let e = &mut self.entries[idx];
        e.stamp = self.clock;
        e.base.last_access_tick = tick;
    }

    /// Probe for an already decomposed address.
    pub fn lookup_decomposed(
        &mut self,
        d: &DecomposedAddress,
        who: RequestIdentity,
        tick: Tick,
    ) -> LookupResult {
        let ways = self.geom.ways as usize;
        let Some(idx) = self.find(d, who.process_id) else {
            return LookupResult::miss(LookupKind::MissNoEntry, self.probe_cost(None));
        };
        let cost = self.probe_cost(Some(idx % ways));
        self.touch(idx, tick);
        let slot = &mut self.entries[idx].slots[d.sub_index as usize];
        if slot.valid {
            slot.last_touch = self.clock;
            LookupResult::hit(slot.pfn, cost)
        } else {
            LookupResult::miss(LookupKind::MissSubEntry, cost)
        }
    }

    pub fn insert_decomposed(
        &mut self,
        d: &DecomposedAddress,
        pfn: u64,
        who: RequestIdentity,
        tick: Tick,
    ) -> InsertOutcome {
        let ways = self.geom.ways as usize;
        let set = self.set_range(d.set_index);
        if let Some(idx) = self.find(d, who.process_id) {
            self.touch(idx, tick);
            let clock = self.clock;
            let slot = &mut self.entries[idx].slots[d.sub_index as usize];
            slot.valid = true;
            slot.pfn = pfn;
            slot.aib = 0;
            slot.last_touch = clock;
            return InsertOutcome::FilledExisting { way: idx % ways };
        }

        let allowed = match &self.partition {
            Some(p) => p.ways_for(who.instance_id, ways),
            None => 0..ways,
        };
        let candidates = allowed.clone().map(|w| set.start + w);
        let vacant = candidates.clone().find(|&i| !self.entries[i].base.valid);
        let (idx, outcome_evicted) = match vacant {
            Some(i) => (i, None),
            None => {
                // Lowest stamp wins; ties go to the lowest way.
                let victim = candidates
                    .min_by_key(|&i| (self.entries[i].stamp, i))
                    .expect("partition gives every instance at least one way");
                let e = &self.entries[victim];
                let sample = EvictionSample {
                    pid: e.base.owner_pid,
                    utilized: e.utilized(),
                    capacity: self.geom.subentries_per_entry,
                    shared: false,
                    tick,
                };
                self.evictions.push(sample);
                self.counters.entry_evictions += 1;
                (victim, Some(sample))
            }
        };

        let sub = self.geom.subentries_per_entry as usize;
        let mut entry = Entry::vacant(sub);
        entry.base = BaseRecord::new(d.vpb, who, tick);
        self.entries[idx] = entry;
        self.touch(idx, tick);
        let clock = self.clock;
        self.entries[idx].slots[d.sub_index as usize] = SubEntrySlot {
            valid: true,
            pfn,
            aib: 0,
            last_touch: clock,
        };
        let way = idx % ways;
        match outcome_evicted {
            None => InsertOutcome::NewEntryVacant { way },
            Some(s) => InsertOutcome::NewEntryEvicted {
                way,
                samples: vec![s],
            },
        }
    }

    /// Valid sub-entries of the entry at `(set, way)`, or `None` if the way is vacant.
    pub fn utilized(&self, set: u32, way: usize) -> Option<u32> {
        let e = &self.entries[self.set_range(set).start + way];
        e.base.valid.then(|| e.utilized())
    }

    /// `(vpb, pid)` of every valid way of `set`, in way order.
    pub fn set_contents(&self, set: u32) -> Vec<Option<(u64, u32)>> {
        self.set_range(set)
            .map(|i| {
                let b = &self.entries[i].base;
                b.valid.then_some((b.vpb, b.owner_pid))
            })
            .collect()
    }
}

impl TranslationBuffer for SubEntryTlb {
    fn geometry(&self) -> TlbGeometry {
        self.geom
    }

    fn page_config(&self) -> PageConfig {
        self.page
    }

    fn lookup(&mut self, vaddr: u64, who: RequestIdentity, tick: Tick) -> LookupResult {
        let d = self.decompose(vaddr);
        self.lookup_decomposed(&d, who, tick)
    }

    fn insert(&mut self, vaddr: u64, pfn: u64, who: RequestIdentity, tick: Tick) -> InsertOutcome {
        let d = self.decompose(vaddr);
        self.insert_decomposed(&d, pfn, who, tick)
    }

    fn take_evictions(&mut self) -> Vec<EvictionSample> {
        std::mem::take(&mut self.evictions)
    }

    fn counters(&self) -> TlbCounters {
        self.counters
    }

    fn resident_translations(&self) -> u64 {
        self.entries
            .iter()
            .filter(|e| e.base.valid)
            .map(|e| e.utilized() as u64)
            .sum()
    }
}
