//! Reference models written independently of the library's data structures.
#![allow(dead_code)]

use std::collections::HashSet;

use star_tlb::tlb::LookupKind;

/// What one probe of a reference model returned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Probe {
    pub kind: LookupKind,
    pub pfn: Option<u64>,
    pub latency: u64,
}

/// One eviction-time sample: `(pid, utilized, capacity, shared)`.
pub type Sample = (u32, u32, u32, bool);

#[derive(Debug, Clone, Copy, Default)]
struct Base {
    valid: bool,
    vpb: u64,
    pid: u32,
}

/// A two-base entry spelled out as flat arrays, with `layout` as the raw
/// 2-bit field: 0 = not shared, 1 = sequential, 2 = stride.
#[derive(Debug, Clone, Copy, Default)]
struct Entry {
    base: [Base; 2],
    layout: u8,
    valid: [bool; 16],
    pfn: [u64; 16],
    aib: [u8; 16],
    touched: [u64; 16],
    lru: u64,
}

impl Entry {
    fn owned_count(&self, b: usize) -> u32 {
        (0..16).filter(|&p| self.valid[p] && self.owner(p) == b).count() as u32
    }

    fn owner(&self, p: usize) -> usize {
        match self.layout {
            1 => p / 8,
            2 => p % 2,
            _ => 0,
        }
    }

    fn used(&self) -> u32 {
        self.valid.iter().filter(|&&v| v).count() as u32
    }
}

/// Step-by-step model of the two-base lookup and insert procedures.
pub struct TwoBaseOracle {
    sets: usize,
    ways: usize,
    latency: u64,
    e: Vec<Entry>,
    clock: u64,
    pub samples: Vec<Sample>,
    sharing: bool,
}

/// Slot and AIB of `sub` for base `b` under `layout`.
fn place(layout: u8, b: usize, sub: u32) -> (usize, u8) {
    let sub = sub as usize;
    if layout == 1 {
        // Use the last three bits of the sub-entry index.
        (b * 8 + (sub & 0b111), (sub >> 3) as u8)
    } else {
        // Use the first three bits of the sub-entry index.
        ((sub >> 1) * 2 + b, (sub & 1) as u8)
    }
}

fn unplace(layout: u8, p: usize, aib: u8) -> u32 {
    if layout == 1 {
        ((aib as usize) * 8 + p % 8) as u32
    } else {
        ((p / 2) * 2 + aib as usize) as u32
    }
}

impl TwoBaseOracle {
    pub fn new(sets: usize, ways: usize, latency: u64, sharing: bool) -> Self {
        Self {
            sets,
            ways,
            latency,
            e: vec![Entry::default(); sets * ways],
            clock: 0,
            samples: Vec::new(),
            sharing,
        }
    }

    fn tick(&mut self) -> u64 {
        self.clock += 1;
        self.clock
    }

    pub fn lookup(&mut self, set: usize, vpb: u64, sub: u32, pid: u32) -> Probe {
        assert!(set < self.sets);
        // Compare each entry in the set with the request's VPB.
        for w in 0..self.ways {
            let i = set * self.ways + w;
            // Check base addresses sequentially.
            for b in 0..2 {
                let base = self.e[i].base[b];
                if !(base.valid && base.vpb == vpb && base.pid == pid) {
                    continue;
                }
                let now = self.tick();
                let en = &mut self.e[i];
                en.lru = now;
                if en.layout == 0 {
                    let s = sub as usize;
                    if en.valid[s] {
                        en.touched[s] = now;
                        return Probe {
                            kind: LookupKind::Hit,
                            pfn: Some(en.pfn[s]),
                            latency: self.latency,
                        };
                    }
                    return Probe {
                        kind: LookupKind::MissSubEntry,
                        pfn: None,
                        latency: self.latency,
                    };
                }
                let latency = self.latency * (b as u64 + 1);
                let (p, aib) = place(en.layout, b, sub);
                // Compare AIB with the request's AIB.
                if en.valid[p] && en.aib[p] == aib {
                    en.touched[p] = now;
                    return Probe {
                        kind: LookupKind::Hit,
                        pfn: Some(en.pfn[p]),
                        latency,
                    };
                }
                return Probe {
                    kind: LookupKind::MissAib,
                    pfn: None,
                    latency,
                };
            }
        }
        Probe {
            kind: LookupKind::MissNoEntry,
            pfn: None,
            latency: self.latency,
        }
    }

    fn write(&mut self, i: usize, p: usize, aib: u8, pfn: u64) {
        let now = self.tick();
        let en = &mut self.e[i];
        en.lru = now;
        en.valid[p] = true;
        en.pfn[p] = pfn;
        en.aib[p] = aib;
        en.touched[p] = now;
    }

    fn fresh(vpb: u64, pid: u32) -> Entry {
        let mut en = Entry::default();
        en.base[0] = Base {
            valid: true,
            vpb,
            pid,
        };
        en
    }

    fn evict_whole(&mut self, i: usize) {
        let en = self.e[i];
        if en.layout == 0 {
            self.samples.push((en.base[0].pid, en.used(), 16, false));
        } else {
            for b in 0..2 {
                self.samples.push((en.base[b].pid, en.owned_count(b), 8, true));
            }
        }
    }

    pub fn insert(&mut self, set: usize, vpb: u64, sub: u32, pid: u32, pfn: u64) {
        let row = set * self.ways;
        // Scenario: base address hit.
        for w in 0..self.ways {
            let i = row + w;
            for b in 0..2 {
                let base = self.e[i].base[b];
                if !(base.valid && base.vpb == vpb && base.pid == pid) {
                    continue;
                }
                let layout = self.e[i].layout;
                if layout == 0 {
                    // Insert translation with the 4-bit index.
                    self.write(i, sub as usize, 0, pfn);
                    return;
                }
                let (p, aib) = place(layout, b, sub);
                let en = self.e[i];
                if en.valid[p] && en.aib[p] == aib {
                    self.write(i, p, aib, pfn);
                    return;
                }
                if en.owned_count(b) == 8 {
                    // Make the entry non-shared and reorganize by 4-bit index.
                    let other = 1 - b;
                    self.samples.push((en.base[other].pid, en.owned_count(other), 8, true));
                    let mut keep = Self::fresh(vpb, pid);
                    keep.lru = en.lru;
                    for q in 0..16 {
                        if en.valid[q] && en.owner(q) == b {
                            let s = unplace(layout, q, en.aib[q]) as usize;
                            keep.valid[s] = true;
                            keep.pfn[s] = en.pfn[q];
                            keep.touched[s] = en.touched[q];
                        }
                    }
                    self.e[i] = keep;
                    self.write(i, sub as usize, 0, pfn);
                    return;
                }
                // Same local index, different AIB: the new one replaces it.
                self.write(i, p, aib, pfn);
                return;
            }
        }

        // Scenario: miss all base addresses.
        if let Some(w) = (0..self.ways).find(|&w| !self.e[row + w].base[0].valid) {
            // Insert the new base address into the first vacant entry.
            self.e[row + w] = Self::fresh(vpb, pid);
            self.write(row + w, sub as usize, 0, pfn);
            return;
        }

        let mut target: Option<(bool, u32, usize)> = None;
        if self.sharing {
            for w in 0..self.ways {
                let en = &self.e[row + w];
                if en.layout == 0 && en.used() < 8 {
                    let key = (en.base[0].pid != pid, en.used(), w);
                    if target.is_none_or(|t| key < t) {
                        target = Some(key);
                    }
                }
            }
        }
        if let Some((_, _, w)) = target {
            let i = row + w;
            let old = self.e[i];
            // Check the access pattern of the sub-entries.
            let idx: Vec<usize> = (0..16).filter(|&s| old.valid[s]).collect();
            let run = idx.last().unwrap() - idx[0] + 1 == idx.len();
            let layout = if run { 1 } else { 2 };
            let mut en = old;
            en.layout = layout;
            en.valid = [false; 16];
            en.aib = [0; 16];
            en.base[1] = Base {
                valid: true,
                vpb,
                pid,
            };
            let mut order = idx.clone();
            order.sort_by(|&a, &b| old.touched[b].cmp(&old.touched[a]).then(a.cmp(&b)));
            for s in order {
                let (p, aib) = place(layout, 0, s as u32);
                if !en.valid[p] {
                    en.valid[p] = true;
                    en.pfn[p] = old.pfn[s];
                    en.aib[p] = aib;
                    en.touched[p] = old.touched[s];
                }
            }
            self.e[i] = en;
            let (p, aib) = place(layout, 1, sub);
            if self.e[i].valid[p] && self.e[i].owner(p) == 0 {
                // Try to relocate the original entry, else evict it. The
                // incumbent was remapped above, so its translations never
                // sit in the joiner's slots.
                unreachable!("joiner slot held by the incumbent");
            }
            self.write(i, p, aib, pfn);
            return;
        }

        // Evict the least recently used entry and insert the new address.
        let w = (0..self.ways).min_by_key(|&w| (self.e[row + w].lru, w)).unwrap();
        self.evict_whole(row + w);
        self.e[row + w] = Self::fresh(vpb, pid);
        self.write(row + w, sub as usize, 0, pfn);
    }
}

/// Brute-force reuse distance: distinct keys strictly between the two
/// accesses, by scanning back.
pub fn brute_reuse(stream: &[(u32, u64)]) -> Vec<Option<u64>> {
    (0..stream.len())
        .map(|i| {
            let prev = (0..i).rev().find(|&j| stream[j] == stream[i])?;
            let between: HashSet<_> = stream[prev + 1..i].iter().collect();
            Some(between.len() as u64)
        })
        .collect()
}

type Line = (u32, u64, [Option<u64>; 16]);

/// Fully spelled-out LRU sub-entry cache: a list per set, most recent last.
pub struct LruOracle {
    sets: Vec<Vec<Line>>,
    ways: usize,
}

impl LruOracle {
    pub fn new(sets: usize, ways: usize) -> Self {
        Self {
            sets: vec![Vec::new(); sets],
            ways,
        }
    }

    /// Returns the hit/miss kind and refreshes recency on any tag match.
    pub fn lookup(&mut self, set: usize, vpb: u64, sub: u32, pid: u32) -> LookupKind {
        let s = &mut self.sets[set];
        match s.iter().position(|e| e.0 == pid && e.1 == vpb) {
            None => LookupKind::MissNoEntry,
            Some(i) => {
                let e = s.remove(i);
                let kind = if e.2[sub as usize].is_some() {
                    LookupKind::Hit
                } else {
                    LookupKind::MissSubEntry
                };
                s.push(e);
                kind
            }
        }
    }

    /// Returns the utilization of the evicted entry, if any.
    pub fn insert(&mut self, set: usize, vpb: u64, sub: u32, pid: u32, pfn: u64) -> Option<u32> {
        let ways = self.ways;
        let s = &mut self.sets[set];
        if let Some(i) = s.iter().position(|e| e.0 == pid && e.1 == vpb) {
            let mut e = s.remove(i);
            e.2[sub as usize] = Some(pfn);
            s.push(e);
            return None;
        }
        let mut evicted = None;
        if s.len() == ways {
            let e = s.remove(0);
            evicted = Some(e.2.iter().filter(|x| x.is_some()).count() as u32);
        }
        let mut subs = [None; 16];
        subs[sub as usize] = Some(pfn);
        s.push((pid, vpb, subs));
        evicted
    }
}

/// Outcome of driving the library's sharing TLB and [`TwoBaseOracle`] with the
/// same random stream.
#[derive(Debug, Default)]
pub struct Agreement {
    pub accesses: u64,
    pub mismatches: u64,
    pub first_mismatch: Option<String>,
    pub shares: u64,
    pub reverts: u64,
    pub conflicts: u64,
    pub hits: u64,
}

fn pfn_of(pid: u32, set: usize, vpb: u64, sub: u32) -> u64 {
    ((pid as u64) << 32) ^ (vpb << 12) ^ ((set as u64) << 4) ^ sub as u64
}

/// Random accesses over 16 sets x 4 ways with three pids. Each access probes
/// and, on a miss, inserts. Phases alternate between clustered and strided
/// sub-entry choices so both layouts, reverts and conflicts are exercised.
pub fn compare_with_oracle(accesses: u64, seed: u64, sharing: bool) -> Agreement {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use star_tlb::addr::{DecomposedAddress, PageConfig, RequestIdentity, TlbGeometry};
    use star_tlb::tlb::{StarConfig, StarTlb, TranslationBuffer};

    const SETS: usize = 16;
    const WAYS: usize = 4;
    let geom = TlbGeometry::new(SETS as u32, WAYS as u32, 16, 40);
    let cfg = StarConfig {
        sharing,
        ..StarConfig::default()
    };
    let mut lib = StarTlb::new(geom, PageConfig::default(), cfg);
    let mut ora = TwoBaseOracle::new(SETS, WAYS, 40, sharing);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Agreement::default();
    let mut seen = 0usize;

    for i in 0..accesses {
        let phase = (i / 2000) % 3;
        let pid = rng.gen_range(0..3u32);
        let set = rng.gen_range(0..SETS);
        let vpb = rng.gen_range(0..if phase == 2 { 3 } else { 7u64 });
        let sub = match phase {
            0 => rng.gen_range(0..4u32) + 4 * (vpb as u32 % 4),
            1 => 2 * rng.gen_range(0..8u32),
            _ => rng.gen_range(0..16u32),
        };
        let d = DecomposedAddress {
            offset: 0,
            sub_index: sub,
            set_index: set as u32,
            vpb,
        };
        let who = RequestIdentity::new(pid as u16, pid);
        let got = lib.lookup_decomposed(&d, who, i);
        let want = ora.lookup(set, vpb, sub, pid);
        let got = Probe {
            kind: got.kind,
            pfn: got.pfn,
            latency: got.latency_cycles,
        };
        out.accesses += 1;
        let mut note = |what: String| {
            out.mismatches += 1;
            out.first_mismatch.get_or_insert(format!("access {i}: {what}"));
        };
        if got != want {
            note(format!("lookup {got:?} vs oracle {want:?}"));
        }
        if got.kind.is_hit() {
            out.hits += 1;
        } else {
            let pfn = pfn_of(pid, set, vpb, sub);
            lib.insert_decomposed(&d, pfn, who, i);
            ora.insert(set, vpb, sub, pid, pfn);
        }
        let lib_samples: Vec<Sample> = lib
            .take_evictions()
            .iter()
            .map(|s| (s.pid, s.utilized, s.capacity, s.shared))
            .collect();
        let ora_samples = &ora.samples[seen..];
        seen = ora.samples.len();
        if lib_samples != ora_samples {
            note(format!("evictions {lib_samples:?} vs oracle {ora_samples:?}"));
        }
    }
    let c = lib.counters();
    out.shares = c.shares;
    out.reverts = c.reverts;
    out.conflicts = c.conflict_evictions;
    out
}
