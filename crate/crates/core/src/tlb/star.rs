use crate::addr::{decompose, DecomposedAddress, PageConfig, RequestIdentity, Tick, TlbGeometry};
use crate::metrics::EvictionSample;

use super::layout::{
    choose_layout, local_of, owner_of, reconstruct_index, slot_map_degree, slots_of, Layout3,
    LayoutMode, SLOTS,
};
use super::{
    BaseRecord, InsertOutcome, LookupKind, LookupResult, SubEntrySlot, TlbCounters,
    TranslationBuffer, WayPartition,
};

const MAX_BASES: usize = 4;

/// Policy switches for [`StarTlb`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StarConfig {
    /// Admit a second base into under-used entries. When off the TLB behaves
    /// exactly like [`super::SubEntryTlb`].
    pub sharing: bool,
    /// Allow two-base entries whose bases each use fewer than four slots to
    /// take up to four bases.
    pub four_way: bool,
    /// Confine each instance to its own ways (sharing then stays inside the
    /// instance).
    pub partition: Option<WayPartition>,
}

impl StarConfig {
    pub fn two_base() -> Self {
        Self {
            sharing: true,
            ..Self::default()
        }
    }

    pub fn four_base() -> Self {
        Self {
            sharing: true,
            four_way: true,
            partition: None,
        }
    }
}

/// One L3 entry with room for up to four bases.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StarEntry {
    /// Bases in join order; ordinal 0 is the incumbent.
    pub bases: [BaseRecord; MAX_BASES],
    /// 1 (exclusive), 2 or 4.
    pub degree: usize,
    pub layout: LayoutMode,
    pub slots: [SubEntrySlot; SLOTS],
    pub stamp: u64,
}

impl Default for StarEntry {
    fn default() -> Self {
        Self {
            bases: [BaseRecord::default(); MAX_BASES],
            degree: 1,
            layout: LayoutMode::NonShared,
            slots: [SubEntrySlot::default(); SLOTS],
            stamp: 0,
        }
    }
}

impl StarEntry {
    pub fn is_valid(&self) -> bool {
        self.bases[0].valid
    }

    pub fn is_shared(&self) -> bool {
        self.layout != LayoutMode::NonShared
    }

    pub fn base_count(&self) -> usize {
        self.bases.iter().filter(|b| b.valid).count()
    }

    pub fn utilized(&self) -> u32 {
        self.slots.iter().filter(|s| s.valid).count() as u32
    }

    pub fn per_base(&self) -> usize {
        SLOTS / self.degree
    }

    pub fn base_utilized(&self, ordinal: usize) -> u32 {
        if !self.is_shared() {
            return if ordinal == 0 { self.utilized() } else { 0 };
        }
        slots_of(self.layout, self.degree, ordinal)
            .filter(|&p| self.slots[p].valid)
            .count() as u32
    }

    pub fn find_base(&self, vpb: u64, pid: u32) -> Option<usize> {
        self.bases.iter().position(|b| b.matches(vpb, pid))
    }

    /// Bitmask of valid slots (meaningful for exclusive entries).
    pub fn occupancy_mask(&self) -> u16 {
        self.slots
            .iter()
            .enumerate()
            .filter(|(_, s)| s.valid)
            .fold(0u16, |m, (i, _)| m | (1 << i))
    }

    pub fn layout3(&self) -> Layout3 {
        Layout3 {
            four_way: self.degree == 4,
            mode: self.layout,
        }
    }

    fn locate(&self, ordinal: usize, sub: u32) -> (usize, u8) {
        if self.is_shared() {
            slot_map_degree(self.layout, self.degree, ordinal, sub)
        } else {
            (sub as usize, 0)
        }
    }

    /// Translations held by `ordinal` as `(sub_index, slot)`.
    fn translations_of(&self, ordinal: usize) -> Vec<(u32, SubEntrySlot)> {
        if !self.is_shared() {
            return self
                .slots
                .iter()
                .enumerate()
                .filter(|(_, s)| s.valid)
                .map(|(i, s)| (i as u32, *s))
                .collect();
        }
        slots_of(self.layout, self.degree, ordinal)
            .filter(|&p| self.slots[p].valid)
            .map(|p| {
                let s = self.slots[p];
                let local = local_of(self.layout, self.degree, p);
                (
                    reconstruct_index(self.layout, self.degree, local, s.aib),
                    s,
                )
            })
            .collect()
    }

    /// Place translations for `ordinal` under the current layout, most recent
    /// first; returns how many collided with an already placed translation.
    fn place_all(&mut self, ordinal: usize, mut items: Vec<(u32, SubEntrySlot)>) -> u64 {
        items.sort_by(|a, b| b.1.last_touch.cmp(&a.1.last_touch).then(a.0.cmp(&b.0)));
        let mut dropped = 0;
        for (sub, slot) in items {
            let (phys, aib) = self.locate(ordinal, sub);
            if self.slots[phys].valid {
                dropped += 1;
            } else {
                self.slots[phys] = SubEntrySlot { aib, ..slot };
            }
        }
        dropped
    }

    fn sample(&self, ordinal: usize, tick: Tick) -> EvictionSample {
        EvictionSample {
            pid: self.bases[ordinal].owner_pid,
            utilized: self.base_utilized(ordinal),
            capacity: self.per_base() as u32,
            shared: self.is_shared(),
            tick,
        }
    }

    /// Samples for evicting the whole entry.
    fn eviction_samples(&self, tick: Tick) -> Vec<EvictionSample> {
        (0..MAX_BASES)
            .filter(|&o| self.bases[o].valid)
            .map(|o| self.sample(o, tick))
            .collect()
    }

    fn check(&self) -> Result<(), String> {
        if !self.is_valid() {
            return if self.utilized() == 0 && self.base_count() == 0 {
                Ok(())
            } else {
                Err("vacant entry holds state".into())
            };
        }
        match (self.degree, self.layout) {
            (1, LayoutMode::NonShared) => {
                if self.base_count() != 1 {
                    return Err("exclusive entry with extra bases".into());
                }
                if self.slots.iter().any(|s| s.valid && s.aib != 0) {
                    return Err("exclusive entry with nonzero AIB".into());
                }
            }
            (2, LayoutMode::Sequential | LayoutMode::Stride) => {
                if !(self.bases[0].valid && self.bases[1].valid) || self.base_count() != 2 {
                    return Err("two-way entry without exactly two bases".into());
                }
            }
            (4, LayoutMode::Sequential | LayoutMode::Stride) => {
                if self.base_count() < 3 {
                    return Err("four-way entry with fewer than three bases".into());
                }
            }
            (d, l) => return Err(format!("degree {d} with layout {l:?}")),
        }
        for (p, s) in self.slots.iter().enumerate() {
            if s.valid && self.is_shared() && !self.bases[owner_of(self.layout, self.degree, p)].valid
            {
                return Err(format!("slot {p} owned by a vacant base"));
            }
        }
        for i in 0..MAX_BASES {
            for j in i + 1..MAX_BASES {
                let (a, b) = (&self.bases[i], &self.bases[j]);
                if a.valid && b.valid && a.vpb == b.vpb && a.owner_pid == b.owner_pid {
                    return Err("duplicate base".into());
                }
            }
        }
        Ok(())
    }
}

/// Sub-entry TLB whose entries can be shared by several bases.
#[derive(Debug, Clone)]
pub struct StarTlb {
    geom: TlbGeometry,
    page: PageConfig,
    cfg: StarConfig,
    entries: Vec<StarEntry>,
    clock: u64,
    evictions: Vec<EvictionSample>,
    counters: TlbCounters,
}

impl StarTlb {
    /// `geom.subentries_per_entry` must be 16.
    pub fn new(geom: TlbGeometry, page: PageConfig, cfg: StarConfig) -> Self {
        assert_eq!(
            geom.subentries_per_entry as usize, SLOTS,
            "sharing entries have 16 sub-entries"
        );
        Self {
            geom,
            page: geom.page_config(page),
            cfg,
            entries: vec![StarEntry::default(); geom.entries() as usize],
            clock: 0,
            evictions: Vec::new(),
            counters: TlbCounters::default(),
        }
    }

    pub fn config(&self) -> &StarConfig {
        &self.cfg
    }

    pub fn decompose(&self, vaddr: u64) -> DecomposedAddress {
        decompose(vaddr, self.page, &self.geom)
    }

    pub fn entry(&self, set: u32, way: usize) -> &StarEntry {
        &self.entries[self.set_start(set) + way]
    }

    fn set_start(&self, set: u32) -> usize {
        set as usize * self.geom.ways as usize
    }

    fn ways(&self) -> usize {
        self.geom.ways as usize
    }

    fn allowed_ways(&self, who: RequestIdentity) -> std::ops::Range<usize> {
        match &self.cfg.partition {
            Some(p) => p.ways_for(who.instance_id, self.ways()),
            None => 0..self.ways(),
        }
    }

    fn find(&self, d: &DecomposedAddress, pid: u32) -> Option<(usize, usize)> {
        let start = self.set_start(d.set_index);
        (start..start + self.ways()).find_map(|i| {
            let e = &self.entries[i];
            e.is_valid()
                .then(|| e.find_base(d.vpb, pid))
                .flatten()
                .map(|o| (i, o))
        })
    }

    fn touch(&mut self, idx: usize, ordinal: usize, tick: Tick) -> u64 {
        self.clock += 1;
        let e = &mut self.entries[idx];
        e.stamp = self.clock;
        e.bases[ordinal].last_access_tick = tick;
        self.clock
    }

    pub fn lookup_decomposed(
        &mut self,
        d: &DecomposedAddress,
        who: RequestIdentity,
        tick: Tick,
    ) -> LookupResult {
        let base_latency = self.geom.lookup_latency_cycles;
        let Some((idx, ord)) = self.find(d, who.process_id) else {
            return LookupResult::miss(LookupKind::MissNoEntry, base_latency);
        };
        let clock = self.touch(idx, ord, tick);
        let e = &mut self.entries[idx];
        if !e.is_shared() {
            let slot = &mut e.slots[d.sub_index as usize];
            return if slot.valid {
                slot.last_touch = clock;
                LookupResult::hit(slot.pfn, base_latency)
            } else {
                LookupResult::miss(LookupKind::MissSubEntry, base_latency)
            };
        }
        // Bases of a shared entry are compared one after another.
        let latency = base_latency * (ord as u64 + 1);
        let (phys, aib) = e.locate(ord, d.sub_index);
        let slot = &mut e.slots[phys];
        if slot.valid && slot.aib == aib {
            slot.last_touch = clock;
            LookupResult::hit(slot.pfn, latency)
        } else {
            LookupResult::miss(LookupKind::MissAib, latency)
        }
    }

    pub fn insert_decomposed(
        &mut self,
        d: &DecomposedAddress,
        pfn: u64,
        who: RequestIdentity,
        tick: Tick,
    ) -> InsertOutcome {
        let ways = self.ways();
        if let Some((idx, ord)) = self.find(d, who.process_id) {
            return self.insert_into_base(idx, ord, d.sub_index, pfn, tick);
        }

        let start = self.set_start(d.set_index);
        let allowed = self.allowed_ways(who);
        let new_base = BaseRecord::new(d.vpb, who, tick);

        if let Some(w) = allowed.clone().find(|&w| !self.entries[start + w].is_valid()) {
            let idx = start + w;
            let mut e = StarEntry::default();
            e.bases[0] = new_base;
            self.entries[idx] = e;
            self.fill(idx, 0, d.sub_index, pfn, tick);
            return InsertOutcome::NewEntryVacant { way: w };
        }

        if self.cfg.sharing {
            if let Some(w) = self.select_share_target(d.set_index, who) {
                let idx = start + w;
                self.transition_to_shared(idx, new_base);
                self.fill(idx, 1, d.sub_index, pfn, tick);
                return InsertOutcome::Shared {
                    way: w,
                    layout: self.entries[idx].layout,
                };
            }
            if self.cfg.four_way {
                if let Some(w) = self.select_four_way_target(d.set_index, who) {
                    let idx = start + w;
                    let ord = self.join_four_way(idx, new_base);
                    self.fill(idx, ord, d.sub_index, pfn, tick);
                    return InsertOutcome::Shared {
                        way: w,
                        layout: self.entries[idx].layout,
                    };
                }
            }
        }

        let victim = allowed
            .map(|w| start + w)
            .min_by_key(|&i| (self.entries[i].stamp, i))
            .expect("every instance owns at least one way");
        let samples = self.entries[victim].eviction_samples(tick);
        self.evictions.extend_from_slice(&samples);
        self.counters.entry_evictions += 1;
        let mut e = StarEntry::default();
        e.bases[0] = new_base;
        self.entries[victim] = e;
        self.fill(victim, 0, d.sub_index, pfn, tick);
        InsertOutcome::NewEntryEvicted {
            way: victim % ways,
            samples,
        }
    }

    /// Write a translation for `ordinal` and refresh recency.
    fn fill(&mut self, idx: usize, ordinal: usize, sub: u32, pfn: u64, tick: Tick) {
        let clock = self.touch(idx, ordinal, tick);
        let e = &mut self.entries[idx];
        let (phys, aib) = e.locate(ordinal, sub);
        e.slots[phys] = SubEntrySlot {
            valid: true,
            pfn,
            aib,
            last_touch: clock,
        };
    }

    fn insert_into_base(
        &mut self,
        idx: usize,
        ord: usize,
        sub: u32,
        pfn: u64,
        tick: Tick,
    ) -> InsertOutcome {
        let way = idx % self.ways();
        let e = &self.entries[idx];
        if !e.is_shared() {
            self.fill(idx, ord, sub, pfn, tick);
            return InsertOutcome::FilledExisting { way };
        }
        let (phys, aib) = e.locate(ord, sub);
        let resident = e.slots[phys];
        if resident.valid && resident.aib == aib {
            self.fill(idx, ord, sub, pfn, tick);
            return InsertOutcome::FilledExisting { way };
        }
        if e.base_utilized(ord) as usize == e.per_base() {
            // The base outgrew its share.
            let samples = if e.degree == 4 {
                let (samples, new_ord) = self.demote_to_two(idx, ord, tick);
                self.place_with_conflict(idx, new_ord, sub, pfn, tick);
                samples
            } else {
                let samples = self.revert_to_exclusive(idx, ord, tick);
                self.fill(idx, 0, sub, pfn, tick);
                samples
            };
            return InsertOutcome::Reverted { way, samples };
        }
        self.place_with_conflict(idx, ord, sub, pfn, tick);
        InsertOutcome::FilledExisting { way }
    }

    /// Fill, replacing whatever this base held at the same local index.
    fn place_with_conflict(&mut self, idx: usize, ord: usize, sub: u32, pfn: u64, tick: Tick) {
        let e = &self.entries[idx];
        let (phys, aib) = e.locate(ord, sub);
        let resident = e.slots[phys];
        if resident.valid && resident.aib != aib {
            self.counters.conflict_evictions += 1;
        }
        self.fill(idx, ord, sub, pfn, tick);
    }

    /// Choose an exclusive entry of `set` to host a new base.
    ///
    /// Eligible entries are exclusive with fewer than eight valid slots.
    /// Entries owned by the requesting process come first, then the lowest
    /// utilization, then the lowest way.
    pub fn select_share_target(&self, set: u32, who: RequestIdentity) -> Option<usize> {
        let start = self.set_start(set);
        self.allowed_ways(who)
            .filter(|&w| {
                let e = &self.entries[start + w];
                e.is_valid() && !e.is_shared() && e.utilized() < 8
            })
            .min_by_key(|&w| {
                let e = &self.entries[start + w];
                (e.bases[0].owner_pid != who.process_id, e.utilized(), w)
            })
    }

    /// Candidates for four-way sharing: two-base entries whose bases each use
    /// fewer than four slots, and four-way entries with a free base position.
    fn select_four_way_target(&self, set: u32, who: RequestIdentity) -> Option<usize> {
        let start = self.set_start(set);
        self.allowed_ways(who)
            .filter(|&w| {
                let e = &self.entries[start + w];
                match e.degree {
                    2 => (0..2).all(|o| e.base_utilized(o) < 4),
                    4 => e.base_count() < MAX_BASES,
                    _ => false,
                }
            })
            .min_by_key(|&w| {
                let e = &self.entries[start + w];
                let same_pid = e
                    .bases
                    .iter()
                    .any(|b| b.valid && b.owner_pid == who.process_id);
                (!same_pid, e.utilized(), w)
            })
    }

    /// Turn an exclusive entry into a two-base entry with `new_base` as joiner.
    ///
    /// The layout follows the incumbent's occupancy. Incumbent translations
    /// are moved to their slots under that layout; if two land on one slot the
    /// more recently touched survives.
    pub fn transition_to_shared(&mut self, idx: usize, new_base: BaseRecord) {
        let e = &mut self.entries[idx];
        debug_assert!(e.is_valid() && !e.is_shared());
        let layout = choose_layout(e.occupancy_mask());
        let items = e.translations_of(0);
        e.slots = [SubEntrySlot::default(); SLOTS];
        e.layout = layout;
        e.degree = 2;
        e.bases[1] = new_base;
        let dropped = e.place_all(0, items);
        self.counters.layout_conflicts += dropped;
        self.counters.shares += 1;
    }

    /// Drop every base except `survivor` and lay its translations out by
    /// their full 4-bit index again.
    pub fn revert_to_exclusive(
        &mut self,
        idx: usize,
        survivor: usize,
        tick: Tick,
    ) -> Vec<EvictionSample> {
        let e = &mut self.entries[idx];
        debug_assert!(e.is_shared());
        let samples: Vec<_> = (0..MAX_BASES)
            .filter(|&o| o != survivor && e.bases[o].valid)
            .map(|o| e.sample(o, tick))
            .collect();
        let items = e.translations_of(survivor);
        let base = e.bases[survivor];
        *e = StarEntry {
            stamp: e.stamp,
            ..StarEntry::default()
        };
        e.bases[0] = base;
        let dropped = e.place_all(0, items);
        debug_assert_eq!(dropped, 0);
        self.evictions.extend_from_slice(&samples);
        self.counters.reverts += 1;
        samples
    }

    /// Four-way entry whose base `keep` is full: evict the least recently
    /// accessed other bases until two remain. Returns the new ordinal of `keep`.
    fn demote_to_two(
        &mut self,
        idx: usize,
        keep: usize,
        tick: Tick,
    ) -> (Vec<EvictionSample>, usize) {
        let e = &mut self.entries[idx];
        let mut others: Vec<usize> = (0..MAX_BASES)
            .filter(|&o| o != keep && e.bases[o].valid)
            .collect();
        others.sort_by_key(|&o| (e.bases[o].last_access_tick, o));
        let evict_n = others.len() - 1;
        let evicted: Vec<usize> = others[..evict_n].to_vec();
        let samples: Vec<_> = evicted.iter().map(|&o| e.sample(o, tick)).collect();

        let survivors: Vec<usize> = (0..MAX_BASES)
            .filter(|&o| e.bases[o].valid && !evicted.contains(&o))
            .collect();
        let moved: Vec<_> = survivors
            .iter()
            .map(|&o| (e.bases[o], e.translations_of(o)))
            .collect();
        let layout = e.layout;
        *e = StarEntry {
            stamp: e.stamp,
            layout,
            degree: 2,
            ..StarEntry::default()
        };
        let mut new_keep = 0;
        for (new_ord, (&old, (base, items))) in survivors.iter().zip(moved).enumerate() {
            e.bases[new_ord] = base;
            let dropped = e.place_all(new_ord, items);
            debug_assert_eq!(dropped, 0);
            if old == keep {
                new_keep = new_ord;
            }
        }
        self.evictions.extend_from_slice(&samples);
        self.counters.demotions += 1;
        (samples, new_keep)
    }

    /// Admit `new_base` into a four-way entry, promoting a two-base entry if
    /// needed. Returns the ordinal given to the new base.
    fn join_four_way(&mut self, idx: usize, new_base: BaseRecord) -> usize {
        let e = &mut self.entries[idx];
        if e.degree == 2 {
            let moved: Vec<_> = (0..2).map(|o| e.translations_of(o)).collect();
            e.slots = [SubEntrySlot::default(); SLOTS];
            e.degree = 4;
            let mut dropped = 0;
            for (o, items) in moved.into_iter().enumerate() {
                dropped += e.place_all(o, items);
            }
            self.counters.layout_conflicts += dropped;
            self.counters.promotions += 1;
        }
        let ord = e
            .bases
            .iter()
            .position(|b| !b.valid)
            .expect("four-way candidate has a free base position");
        e.bases[ord] = new_base;
        self.counters.shares += 1;
        ord
    }

    /// Structural invariants of every entry; used by tests after each step.
    pub fn check_invariants(&self) -> Result<(), String> {
        for (i, e) in self.entries.iter().enumerate() {
            e.check().map_err(|m| format!("entry {i}: {m}"))?;
        }
        for set in 0..self.geom.sets {
            let start = self.set_start(set);
            let bases: Vec<_> = self.entries[start..start + self.ways()]
                .iter()
                .flat_map(|e| e.bases.iter().filter(|b| b.valid))
                .map(|b| (b.vpb, b.owner_pid))
                .collect();
            let mut dedup = bases.clone();
            dedup.sort_unstable();
            dedup.dedup();
            if dedup.len() != bases.len() {
                return Err(format!("set {set}: a base is resident twice"));
            }
        }
        Ok(())
    }
}

impl TranslationBuffer for StarTlb {
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
        self.entries.iter().map(|e| e.utilized() as u64).sum()
    }
}
