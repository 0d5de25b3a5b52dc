//! Clocked translation pipeline: per-TPC L1 TLBs, per-GPC L2 TLBs with
//! MSHRs, one shared L3, and per-GPC page-table walkers.
//!
//! A request probes its TPC's L1, coalesces in the L1 MSHR, probes the GPC's
//! L2, coalesces in the L2 MSHR, probes the L3 and finally walks. A finished
//! walk fills L3, L2 and every waiting L1, and all coalesced requesters
//! complete on the same tick. Only the L3 is visible to every instance.

mod gmmu;
mod mshr;

pub use gmmu::{Gmmu, GmmuConfig, GmmuCounters};
pub use mshr::{MshrOutcome, MshrTable};

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::addr::{PageConfig, RequestIdentity, Tick, TlbGeometry};
use crate::error::{Error, Result};
use crate::metrics::{EvictionSample, ReuseHistogram, ReuseTracker};
use crate::tlb::{SubEntryTlb, TlbCounters, TranslationBuffer};
use crate::variants::{build_l3, PolicyKind};

/// A page of one tenant: the unit of MSHR coalescing and page walks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PageKey {
    pub who: RequestIdentity,
    pub vpn: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MshrConfig {
    pub l1_capacity: usize,
    pub l2_capacity: usize,
}

impl Default for MshrConfig {
    fn default() -> Self {
        Self {
            l1_capacity: 32,
            l2_capacity: 64,
        }
    }
}

/// Resources of one GPU instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceConfig {
    pub g_units: u32,
    pub gpcs: u32,
    pub tpcs_per_gpc: u32,
}

impl InstanceConfig {
    /// One GPC per compute unit, two TPCs per GPC.
    pub fn with_g_units(g_units: u32) -> Self {
        Self {
            g_units,
            gpcs: g_units,
            tpcs_per_gpc: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HierarchyConfig {
    pub page: PageConfig,
    pub l1: TlbGeometry,
    pub l2: TlbGeometry,
    pub l3: TlbGeometry,
    pub policy: PolicyKind,
    pub gmmu: GmmuConfig,
    pub mshr: MshrConfig,
    pub instances: Vec<InstanceConfig>,
    /// Pages per reuse-distance key, as a shift (0 = per page).
    pub reuse_granularity_shift: u32,
}

impl HierarchyConfig {
    pub fn new(instances: Vec<InstanceConfig>) -> Self {
        Self {
            page: PageConfig::default(),
            l1: TlbGeometry::default_l1(),
            l2: TlbGeometry::default_l2(),
            l3: TlbGeometry::default_l3(),
            policy: PolicyKind::Baseline,
            gmmu: GmmuConfig::default(),
            mshr: MshrConfig::default(),
            instances,
            reuse_granularity_shift: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompletedRequest {
    pub who: RequestIdentity,
    pub vaddr: u64,
    pub issue_tick: Tick,
    pub completion_tick: Tick,
    /// Attached to an outstanding L1 miss instead of probing below L1.
    pub coalesced: bool,
    pub measured: bool,
}

impl CompletedRequest {
    pub fn latency(&self) -> u64 {
        self.completion_tick - self.issue_tick
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelCounters {
    pub probes: u64,
    pub hits: u64,
}

impl LevelCounters {
    fn record(&mut self, hit: bool) {
        self.probes += 1;
        self.hits += hit as u64;
    }

    pub fn misses(&self) -> u64 {
        self.probes - self.hits
    }

    pub fn hit_rate(&self) -> Option<f64> {
        (self.probes > 0).then(|| self.hits as f64 / self.probes as f64)
    }
}

/// Measured per-tenant counters.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PidCounters {
    pub instance_id: u16,
    pub requests: u64,
    pub l1: LevelCounters,
    pub l2: LevelCounters,
    pub l3: LevelCounters,
    pub walks: u64,
    pub l1_coalesced: u64,
    pub l2_coalesced: u64,
    pub mshr_stalls: u64,
    pub reuse: ReuseHistogram,
}

/// Unfiltered totals used for conservation checks.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GlobalCounters {
    pub issued: u64,
    pub completed: u64,
    pub l3_probes: u64,
    pub l3_misses: u64,
    pub walks_started: u64,
    pub walks_completed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Event {
    Issue(u64),
    L1Miss(u64),
    AtL2 { tpc: usize, key: PageKey, measured: bool },
    L2Hit { tpc: usize, key: PageKey, pfn: u64 },
    L2Miss { tpc: usize, key: PageKey, measured: bool },
    AtL3 { gpc: usize, key: PageKey, measured: bool },
    Walk { gpc: usize, key: PageKey },
    WalkDone { gpc: usize, key: PageKey },
    Respond { gpc: usize, key: PageKey, pfn: u64, fill_l3: bool },
}

#[derive(Debug, Clone, Copy)]
struct Request {
    who: RequestIdentity,
    vaddr: u64,
    issue_tick: Tick,
    tpc: usize,
    measured: bool,
    probed_l1: bool,
    coalesced: bool,
}

#[derive(Debug, Clone)]
struct Instance {
    cfg: InstanceConfig,
    first_tpc: usize,
    next_tpc: usize,
    pid: Option<u32>,
    last_issue: Tick,
}

/// The whole translation pipeline of one run.
pub struct Hierarchy {
    cfg: HierarchyConfig,
    instances: Vec<Instance>,
    tpc_gpc: Vec<usize>,
    l1: Vec<SubEntryTlb>,
    l1_mshr: Vec<MshrTable<PageKey, u64>>,
    l2: Vec<SubEntryTlb>,
    l2_mshr: Vec<MshrTable<PageKey, usize>>,
    /// Requests waiting for a free L1 MSHR entry, per TPC.
    l1_parked: Vec<VecDeque<u64>>,
    /// L2 misses waiting for a free L2 MSHR entry, per GPC.
    l2_parked: Vec<VecDeque<(usize, PageKey, bool)>>,
    l3: Box<dyn TranslationBuffer>,
    gmmu: Vec<Gmmu>,
    events: BinaryHeap<Reverse<(Tick, u64, Event)>>,
    seq: u64,
    now: Tick,
    requests: HashMap<u64, Request>,
    next_id: u64,
    completed: Vec<CompletedRequest>,
    stats: BTreeMap<u32, PidCounters>,
    measuring: HashMap<u32, bool>,
    evictions: Vec<EvictionSample>,
    reuse: ReuseTracker,
    totals: GlobalCounters,
}

impl Hierarchy {
    pub fn new(cfg: HierarchyConfig) -> Result<Self> {
        cfg.page.validate()?;
        cfg.l1.validate("l1")?;
        cfg.l2.validate("l2")?;
        cfg.l3.validate("l3")?;
        if cfg.instances.is_empty() {
            return Err(Error::Config("at least one instance is required".into()));
        }
        if cfg.gmmu.walkers_per_gpc == 0 || cfg.mshr.l1_capacity == 0 || cfg.mshr.l2_capacity == 0 {
            return Err(Error::Config(
                "walker and MSHR counts must be positive".into(),
            ));
        }
        let sizes: Vec<u32> = cfg.instances.iter().map(|i| i.g_units).collect();
        let l3 = build_l3(cfg.policy, cfg.l3, cfg.page, &sizes)?;

        let mut instances = Vec::new();
        let mut tpc_gpc = Vec::new();
        let (mut tpcs, mut gpcs) = (0usize, 0usize);
        for (i, ic) in cfg.instances.iter().enumerate() {
            if ic.gpcs == 0 || ic.tpcs_per_gpc == 0 {
                return Err(Error::Config(format!(
                    "instance {i} needs at least one GPC and one TPC"
                )));
            }
            instances.push(Instance {
                cfg: *ic,
                first_tpc: tpcs,
                next_tpc: 0,
                pid: None,
                last_issue: 0,
            });
            for g in 0..ic.gpcs as usize {
                for _ in 0..ic.tpcs_per_gpc {
                    tpc_gpc.push(gpcs + g);
                }
            }
            tpcs += (ic.gpcs * ic.tpcs_per_gpc) as usize;
            gpcs += ic.gpcs as usize;
        }

        Ok(Self {
            l1: (0..tpcs).map(|_| SubEntryTlb::new(cfg.l1, cfg.page)).collect(),
            l1_mshr: (0..tpcs).map(|_| MshrTable::new(cfg.mshr.l1_capacity)).collect(),
            l2: (0..gpcs).map(|_| SubEntryTlb::new(cfg.l2, cfg.page)).collect(),
            l2_mshr: (0..gpcs).map(|_| MshrTable::new(cfg.mshr.l2_capacity)).collect(),
            l1_parked: vec![VecDeque::new(); tpcs],
            l2_parked: vec![VecDeque::new(); gpcs],
            gmmu: (0..gpcs).map(|_| Gmmu::new(cfg.gmmu)).collect(),
            reuse: ReuseTracker::new(cfg.reuse_granularity_shift),
            l3,
            instances,
            tpc_gpc,
            events: BinaryHeap::new(),
            seq: 0,
            now: 0,
            requests: HashMap::new(),
            next_id: 0,
            completed: Vec::new(),
            stats: BTreeMap::new(),
            measuring: HashMap::new(),
            evictions: Vec::new(),
            totals: GlobalCounters::default(),
            cfg,
        })
    }

    pub fn config(&self) -> &HierarchyConfig {
        &self.cfg
    }

    pub fn now(&self) -> Tick {
        self.now
    }

    pub fn totals(&self) -> GlobalCounters {
        self.totals
    }

    pub fn pid_counters(&self) -> &BTreeMap<u32, PidCounters> {
        &self.stats
    }

    pub fn l3_counters(&self) -> TlbCounters {
        self.l3.counters()
    }

    pub fn gmmu_counters(&self) -> GmmuCounters {
        self.gmmu.iter().fold(GmmuCounters::default(), |mut a, g| {
            let c = g.counters();
            a.walks_requested += c.walks_requested;
            a.walks_completed += c.walks_completed;
            a.walk_cache_hits += c.walk_cache_hits;
            a.queued_walks += c.queued_walks;
            a.queue_cycles += c.queue_cycles;
            a
        })
    }

    /// Measured L3 eviction samples collected so far.
    pub fn evictions(&self) -> &[EvictionSample] {
        &self.evictions
    }

    /// Requests still in flight.
    pub fn pending(&self) -> usize {
        self.requests.len()
    }

    fn schedule(&mut self, tick: Tick, ev: Event) {
        self.seq += 1;
        self.events.push(Reverse((tick, self.seq, ev)));
    }

    /// Queue a translation request. Requests of one instance must arrive in
    /// nondecreasing tick order; `measured` marks it as part of the tenant's
    /// first full pass.
    pub fn submit(
        &mut self,
        tick: Tick,
        who: RequestIdentity,
        vaddr: u64,
        measured: bool,
    ) -> Result<()> {
        let inst = self
            .instances
            .get_mut(who.instance_id as usize)
            .ok_or_else(|| Error::Config(format!("unknown instance {}", who.instance_id)))?;
        match inst.pid {
            None => inst.pid = Some(who.process_id),
            Some(p) if p != who.process_id => {
                return Err(Error::Config(format!(
                    "instance {} already runs pid {p}, got pid {}",
                    who.instance_id, who.process_id
                )))
            }
            Some(_) => {}
        }
        if tick < inst.last_issue || tick < self.now {
            return Err(Error::Config(format!(
                "request at tick {tick} for instance {} arrives out of order",
                who.instance_id
            )));
        }
        inst.last_issue = tick;
        let tpc_count = (inst.cfg.gpcs * inst.cfg.tpcs_per_gpc) as usize;
        let tpc = inst.first_tpc + inst.next_tpc;
        inst.next_tpc = (inst.next_tpc + 1) % tpc_count;

        let measuring = self.measuring.entry(who.process_id).or_insert(true);
        if !measured {
            *measuring = false;
        }
        let st = self.stats.entry(who.process_id).or_default();
        st.instance_id = who.instance_id;
        if measured {
            st.requests += 1;
        }

        let id = self.next_id;
        self.next_id += 1;
        self.requests.insert(
            id,
            Request {
                who,
                vaddr,
                issue_tick: tick,
                tpc,
                measured,
                probed_l1: false,
                coalesced: false,
            },
        );
        self.totals.issued += 1;
        self.schedule(tick, Event::Issue(id));
        Ok(())
    }

    /// Process every event up to and including `until_tick` and return the
    /// requests that completed.
    pub fn step(&mut self, until_tick: Tick) -> Vec<CompletedRequest> {
        while let Some(Reverse((tick, _, _))) = self.events.peek() {
            if *tick > until_tick {
                break;
            }
            let Reverse((tick, _, ev)) = self.events.pop().expect("peeked");
            self.now = tick;
            self.handle(tick, ev);
        }
        self.now = self.now.max(until_tick);
        std::mem::take(&mut self.completed)
    }

    /// Drain every outstanding event.
    pub fn run_to_completion(&mut self) -> Vec<CompletedRequest> {
        let mut out = Vec::new();
        while let Some(Reverse((tick, _, _))) = self.events.peek() {
            let t = *tick;
            out.extend(self.step(t));
        }
        out
    }

    fn page_key(&self, who: RequestIdentity, vaddr: u64) -> PageKey {
        PageKey {
            who,
            vpn: self.cfg.page.page_number(vaddr),
        }
    }

    fn key_vaddr(&self, key: &PageKey) -> u64 {
        key.vpn << self.cfg.page.offset_bits()
    }

    fn handle(&mut self, now: Tick, ev: Event) {
        match ev {
            Event::Issue(id) => self.probe_l1(now, id),
            Event::L1Miss(id) => self.l1_miss(now, id),
            Event::AtL2 { tpc, key, measured } => self.probe_l2(now, tpc, key, measured),
            Event::L2Hit { tpc, key, pfn } => {
                let va = self.key_vaddr(&key);
                self.l1[tpc].insert(va, pfn, key.who, now);
                self.finish_l1(now, tpc, &key);
            }
            Event::L2Miss { tpc, key, measured } => self.l2_miss(now, tpc, key, measured),
            Event::AtL3 { gpc, key, measured } => self.probe_l3(now, gpc, key, measured),
            Event::Walk { gpc, key } => {
                self.totals.walks_started += 1;
                if let Some(done) = self.gmmu[gpc].request(key, now) {
                    self.schedule(done, Event::WalkDone { gpc, key });
                }
            }
            Event::WalkDone { gpc, key } => {
                self.totals.walks_completed += 1;
                if let Some((next, done)) = self.gmmu[gpc].complete(key, now) {
                    self.schedule(done, Event::WalkDone { gpc, key: next });
                }
                // Identity mapping: the frame number is the global page number.
                self.respond(now, gpc, key, key.vpn, true);
            }
            Event::Respond {
                gpc,
                key,
                pfn,
                fill_l3,
            } => self.respond(now, gpc, key, pfn, fill_l3),
        }
    }

    fn probe_l1(&mut self, now: Tick, id: u64) {
        let req = self.requests[&id];
        let r = self.l1[req.tpc].lookup(req.vaddr, req.who, now);
        if !req.probed_l1 {
            if req.measured {
                self.stats.get_mut(&req.who.process_id).expect("submitted").l1.record(r.kind.is_hit());
            }
            self.requests.get_mut(&id).expect("live").probed_l1 = true;
        }
        let at = now + r.latency_cycles;
        if r.kind.is_hit() {
            self.complete(id, at);
        } else {
            self.schedule(at, Event::L1Miss(id));
        }
    }

    fn l1_miss(&mut self, now: Tick, id: u64) {
        let req = self.requests[&id];
        let key = self.page_key(req.who, req.vaddr);
        match self.l1_mshr[req.tpc].attach(key, id) {
            MshrOutcome::Allocated => self.schedule(
                now,
                Event::AtL2 {
                    tpc: req.tpc,
                    key,
                    measured: req.measured,
                },
            ),
            MshrOutcome::Coalesced => {
                self.requests.get_mut(&id).expect("live").coalesced = true;
                if req.measured {
                    self.stats.get_mut(&req.who.process_id).expect("submitted").l1_coalesced += 1;
                }
            }
            MshrOutcome::Full => {
                if req.measured {
                    self.stats.get_mut(&req.who.process_id).expect("submitted").mshr_stalls += 1;
                }
                // Replay from the L1 probe the cycle after an entry frees.
                self.l1_parked[req.tpc].push_back(id);
            }
        }
    }

    fn probe_l2(&mut self, now: Tick, tpc: usize, key: PageKey, measured: bool) {
        let gpc = self.tpc_gpc[tpc];
        let va = self.key_vaddr(&key);
        let r = self.l2[gpc].lookup(va, key.who, now);
        if measured {
            self.stats.get_mut(&key.who.process_id).expect("submitted").l2.record(r.kind.is_hit());
        }
        let at = now + r.latency_cycles;
        match r.pfn {
            Some(pfn) => self.schedule(at, Event::L2Hit { tpc, key, pfn }),
            None => self.schedule(at, Event::L2Miss { tpc, key, measured }),
        }
    }

    fn l2_miss(&mut self, now: Tick, tpc: usize, key: PageKey, measured: bool) {
        let gpc = self.tpc_gpc[tpc];
        match self.l2_mshr[gpc].attach(key, tpc) {
            MshrOutcome::Allocated => self.schedule(now, Event::AtL3 { gpc, key, measured }),
            MshrOutcome::Coalesced => {
                if measured {
                    self.stats.get_mut(&key.who.process_id).expect("submitted").l2_coalesced += 1;
                }
            }
            MshrOutcome::Full => {
                if measured {
                    self.stats.get_mut(&key.who.process_id).expect("submitted").mshr_stalls += 1;
                }
                self.l2_parked[gpc].push_back((tpc, key, measured));
            }
        }
    }

    fn probe_l3(&mut self, now: Tick, gpc: usize, key: PageKey, measured: bool) {
        let va = self.key_vaddr(&key);
        let r = self.l3.lookup(va, key.who, now);
        let hit = r.kind.is_hit();
        self.totals.l3_probes += 1;
        if !hit {
            self.totals.l3_misses += 1;
        }
        let distance = self.reuse.access(key.who.process_id, key.vpn);
        if measured {
            let st = self.stats.get_mut(&key.who.process_id).expect("submitted");
            st.l3.record(hit);
            if !hit {
                st.walks += 1;
            }
            if let Some(d) = distance {
                st.reuse.record(d);
            }
        }
        let at = now + r.latency_cycles;
        match r.pfn {
            Some(pfn) => self.schedule(
                at,
                Event::Respond {
                    gpc,
                    key,
                    pfn,
                    fill_l3: false,
                },
            ),
            None => self.schedule(at, Event::Walk { gpc, key }),
        }
    }

    fn respond(&mut self, now: Tick, gpc: usize, key: PageKey, pfn: u64, fill_l3: bool) {
        let va = self.key_vaddr(&key);
        if fill_l3 {
            self.l3.insert(va, pfn, key.who, now);
            for s in self.l3.take_evictions() {
                if self.measuring.get(&s.pid).copied().unwrap_or(true) {
                    self.evictions.push(s);
                }
            }
        }
        self.l2[gpc].insert(va, pfn, key.who, now);
        for tpc in self.l2_mshr[gpc].release(&key) {
            self.l1[tpc].insert(va, pfn, key.who, now);
            self.finish_l1(now, tpc, &key);
        }
        while let Some((tpc, key, measured)) = self.l2_parked[gpc].pop_front() {
            self.schedule(now + 1, Event::L2Miss { tpc, key, measured });
        }
    }

    fn finish_l1(&mut self, now: Tick, tpc: usize, key: &PageKey) {
        for id in self.l1_mshr[tpc].release(key) {
            self.complete(id, now);
        }
        while let Some(id) = self.l1_parked[tpc].pop_front() {
            self.schedule(now + 1, Event::Issue(id));
        }
    }

    fn complete(&mut self, id: u64, at: Tick) {
        let req = self.requests.remove(&id).expect("live request");
        self.totals.completed += 1;
        self.completed.push(CompletedRequest {
            who: req.who,
            vaddr: req.vaddr,
            issue_tick: req.issue_tick,
            completion_tick: at,
            coalesced: req.coalesced,
            measured: req.measured,
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const WHO: RequestIdentity = RequestIdentity::new(0, 7);
    const PAGE: u64 = 64 * 1024;

    fn single() -> Hierarchy {
        Hierarchy::new(HierarchyConfig::new(vec![InstanceConfig::with_g_units(1)])).unwrap()
    }

    #[test]
    fn cold_request_takes_451_cycles() {
        let mut h = single();
        h.submit(0, WHO, 5 * PAGE, true).unwrap();
        let done = h.run_to_completion();
        assert_eq!(done.len(), 1);
        assert_eq!(done[0].latency(), 1 + 10 + 40 + 400);
        assert_eq!(h.totals().walks_started, 1);
    }

    #[test]
    fn second_request_same_tpc_coalesces() {
        let cfg = HierarchyConfig::new(vec![InstanceConfig {
            g_units: 1,
            gpcs: 1,
            tpcs_per_gpc: 1,
        }]);
        let mut h = Hierarchy::new(cfg).unwrap();
        h.submit(0, WHO, 5 * PAGE, true).unwrap();
        h.submit(100, WHO, 5 * PAGE + 64, true).unwrap();
        let done = h.run_to_completion();
        assert_eq!(done.len(), 2);
        assert!(done.iter().all(|d| d.completion_tick == 451));
        assert_eq!(h.totals().walks_started, 1);
        assert_eq!(h.pid_counters()[&7].l1_coalesced, 1);
    }

    #[test]
    fn other_tpc_coalesces_at_l2() {
        let mut h = single();
        h.submit(0, WHO, 5 * PAGE, true).unwrap();
        h.submit(0, WHO, 5 * PAGE, true).unwrap();
        let done = h.run_to_completion();
        assert_eq!(done.len(), 2);
        assert_eq!(h.totals().walks_started, 1);
        assert_eq!(h.pid_counters()[&7].l2_coalesced, 1);
    }

    #[test]
    fn l1_hit_costs_one_cycle() {
        let cfg = HierarchyConfig::new(vec![InstanceConfig {
            g_units: 1,
            gpcs: 1,
            tpcs_per_gpc: 1,
        }]);
        let mut h = Hierarchy::new(cfg).unwrap();
        h.submit(0, WHO, 5 * PAGE, true).unwrap();
        h.run_to_completion();
        h.submit(1000, WHO, 5 * PAGE, true).unwrap();
        let done = h.run_to_completion();
        assert_eq!(done[0].latency(), 1);
        assert_eq!(h.pid_counters()[&7].l2.probes, 1);
    }

    #[test]
    fn l2_hit_after_other_tpc_filled_it() {
        let mut h = single();
        h.submit(0, WHO, 5 * PAGE, true).unwrap();
        h.run_to_completion();
        // Next request goes to the second TPC of the same GPC.
        h.submit(1000, WHO, 5 * PAGE, true).unwrap();
        let done = h.run_to_completion();
        assert_eq!(done[0].latency(), 1 + 10);
    }

    #[test]
    fn repeat_walk_uses_walk_cache() {
        let mut cfg = HierarchyConfig::new(vec![InstanceConfig::with_g_units(1)]);
        // A one-entry L3 and L2 so the page falls out of both.
        cfg.l2 = TlbGeometry::new(1, 1, 16, 10);
        cfg.l3 = TlbGeometry::new(1, 1, 16, 40);
        let mut h = Hierarchy::new(cfg).unwrap();
        h.submit(0, WHO, 0, true).unwrap();
        h.submit(1000, WHO, 16 * PAGE, true).unwrap();
        h.run_to_completion();
        h.submit(2000, WHO, 0, true).unwrap();
        let done = h.run_to_completion();
        // Lands on the first TPC again: L1 still has page 0.
        assert_eq!(done[0].latency(), 1);
        h.submit(3000, WHO, 0, true).unwrap();
        let done = h.run_to_completion();
        assert_eq!(done[0].latency(), 1 + 10 + 40 + 100);
    }

    #[test]
    fn full_l1_mshr_parks_until_a_walk_returns() {
        let mut cfg = HierarchyConfig::new(vec![InstanceConfig {
            g_units: 1,
            gpcs: 1,
            tpcs_per_gpc: 1,
        }]);
        cfg.mshr.l1_capacity = 1;
        let mut h = Hierarchy::new(cfg).unwrap();
        h.submit(0, WHO, 0, true).unwrap();
        h.submit(0, WHO, 32 * PAGE, true).unwrap();
        let mut done = h.run_to_completion();
        done.sort_by_key(|d| d.completion_tick);
        assert_eq!(done[0].completion_tick, 451);
        // Woken one tick after the first miss frees its entry, then misses cold.
        assert_eq!(done[1].completion_tick, 452 + 451);
        assert_eq!(h.pid_counters()[&7].mshr_stalls, 1);
        assert_eq!(h.pending(), 0);
    }

    #[test]
    fn instance_runs_one_pid() {
        let mut h = single();
        h.submit(0, WHO, 0, true).unwrap();
        assert!(h.submit(0, RequestIdentity::new(0, 8), 0, true).is_err());
        assert!(h.submit(0, RequestIdentity::new(3, 8), 0, true).is_err());
    }

    #[test]
    fn out_of_order_submission_is_rejected() {
        let mut h = single();
        h.submit(10, WHO, 0, true).unwrap();
        assert!(h.submit(5, WHO, 0, true).is_err());
    }
}
