//! Synthetic tenant traces, multi-tenant scheduling and trace files.
//!
//! Every generated access lands on offset 0 of its page; the simulator only
//! cares about page numbers. Tenant address spaces are disjoint because the
//! pid is placed above bit 40 of every virtual address.

mod suite;
mod trace;

pub use suite::{suite, Mix};
pub use trace::{parse_trace, read_trace, write_trace, write_trace_to};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::addr::{PageConfig, Tick};
use crate::error::{Error, Result};
use crate::metrics::MpkiClass;

/// Bit position of the pid inside generated virtual addresses.
pub const PID_SHIFT: u32 = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PatternKind {
    /// Pages `0, 1, .., F-1`, repeated.
    Stream,
    /// Pages `0, k, 2k, ..`: the `i`-th access touches `(i mod F) * k`.
    Stride(u64),
    /// `blocks` runs of `block_pages` contiguous pages, visited in a seeded
    /// order that is the same on every lap.
    Block { block_pages: u64, blocks: u64 },
    /// Pointer chase around one seeded random cycle through all F pages.
    Dependent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatternSpec {
    pub kind: PatternKind,
    pub footprint_pages: u64,
    pub accesses: u64,
    /// Requests issued per tick.
    #[serde(default = "one")]
    pub intensity: u32,
}

fn one() -> u32 {
    1
}

fn default_instructions() -> u64 {
    10
}

impl PatternSpec {
    pub fn new(kind: PatternKind, footprint_pages: u64, accesses: u64) -> Self {
        Self {
            kind,
            footprint_pages,
            accesses,
            intensity: 1,
        }
    }

    pub fn with_intensity(self, intensity: u32) -> Self {
        Self { intensity, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.footprint_pages == 0 {
            return Err(Error::Config("footprint_pages must be at least 1".into()));
        }
        if self.intensity == 0 {
            return Err(Error::Config("intensity must be at least 1".into()));
        }
        match self.kind {
            PatternKind::Stride(0) => Err(Error::Config("stride must be at least 1".into())),
            PatternKind::Block {
                block_pages,
                blocks,
            } if block_pages.checked_mul(blocks) != Some(self.footprint_pages) => {
                Err(Error::Config(format!(
                    "block_pages * blocks = {block_pages} * {blocks} must equal footprint_pages {}",
                    self.footprint_pages
                )))
            }
            _ => Ok(()),
        }
    }
}

/// One application running alone in one GPU instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TenantSpec {
    pub pid: u32,
    pub g_units: u32,
    /// GPCs of the instance; defaults to `g_units`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gpcs: Option<u32>,
    /// TPCs per GPC; defaults to 2.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tpcs_per_gpc: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class: Option<MpkiClass>,
    /// Instructions represented by each access, for MPKI.
    #[serde(default = "default_instructions")]
    pub instructions_per_access: u64,
    pub pattern: PatternSpec,
}

impl TenantSpec {
    pub fn new(pid: u32, g_units: u32, pattern: PatternSpec) -> Self {
        Self {
            pid,
            g_units,
            gpcs: None,
            tpcs_per_gpc: None,
            class: None,
            instructions_per_access: default_instructions(),
            pattern,
        }
    }

    pub fn with_class(self, class: MpkiClass) -> Self {
        Self {
            class: Some(class),
            ..self
        }
    }

    pub fn with_cores(self, gpcs: u32, tpcs_per_gpc: u32) -> Self {
        Self {
            gpcs: Some(gpcs),
            tpcs_per_gpc: Some(tpcs_per_gpc),
            ..self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TraceRecord {
    pub tick: Tick,
    pub instance_id: u16,
    pub pid: u32,
    pub vaddr: u64,
    pub weight_instructions: u64,
}

/// A record placed in a multi-tenant stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Scheduled {
    pub record: TraceRecord,
    /// Part of the tenant's first complete pass.
    pub measured: bool,
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Page sequence of `spec` under `seed`.
pub fn generate_pages(spec: &PatternSpec, seed: u64) -> Result<Vec<u64>> {
    spec.validate()?;
    let f = spec.footprint_pages;
    let n = spec.accesses;
    let pages = match spec.kind {
        PatternKind::Stream => (0..n).map(|i| i % f).collect(),
        PatternKind::Stride(k) => (0..n).map(|i| (i % f) * k).collect(),
        PatternKind::Block {
            block_pages,
            blocks,
        } => {
            let mut order: Vec<u64> = (0..blocks).collect();
            order.shuffle(&mut rng_for(seed, 0));
            (0..n)
                .map(|i| {
                    let i = i % f;
                    order[(i / block_pages) as usize] * block_pages + i % block_pages
                })
                .collect()
        }
        PatternKind::Dependent => {
            // Sattolo's shuffle yields a single cycle through every page.
            let mut next: Vec<u64> = (0..f).collect();
            let mut rng = rng_for(seed, 0);
            for i in (1..f as usize).rev() {
                let j = rng.gen_range(0..i);
                next.swap(i, j);
            }
            let mut at = 0u64;
            (0..n)
                .map(|_| {
                    let p = at;
                    at = next[at as usize];
                    p
                })
                .collect()
        }
    };
    Ok(pages)
}

/// Virtual address of `page` in the address space of `pid`.
pub fn tenant_vaddr(pid: u32, page: u64, page_cfg: PageConfig) -> u64 {
    ((pid as u64) << PID_SHIFT) | (page * page_cfg.page_size_bytes)
}

/// Trace of one tenant running in `instance_id`. Access `i` is issued at
/// tick `i / intensity`.
pub fn generate(
    tenant: &TenantSpec,
    instance_id: u16,
    page_cfg: PageConfig,
    seed: u64,
) -> Result<Vec<TraceRecord>> {
    let pages = generate_pages(&tenant.pattern, seed ^ (tenant.pid as u64).rotate_left(32))?;
    let rate = tenant.pattern.intensity as u64;
    Ok(pages
        .into_iter()
        .enumerate()
        .map(|(i, page)| TraceRecord {
            tick: i as u64 / rate,
            instance_id,
            pid: tenant.pid,
            vaddr: tenant_vaddr(tenant.pid, page, page_cfg),
            weight_instructions: tenant.instructions_per_access,
        })
        .collect())
}

fn check_rates(traces: &[Vec<TraceRecord>], rates: &[u32]) -> Result<()> {
    if traces.len() != rates.len() {
        return Err(Error::Config(format!(
            "{} traces but {} issue rates",
            traces.len(),
            rates.len()
        )));
    }
    if rates.contains(&0) {
        return Err(Error::Config("issue rates must be positive".into()));
    }
    Ok(())
}

/// Weighted round-robin merge. In round `r` trace `i` issues its next
/// `rates[i]` records, all stamped with tick `r`; a trace that runs out
/// simply stops.
pub fn interleave(traces: &[Vec<TraceRecord>], rates: &[u32]) -> Result<Vec<TraceRecord>> {
    check_rates(traces, rates)?;
    let rounds = traces
        .iter()
        .zip(rates)
        .map(|(t, &r)| t.len().div_ceil(r as usize))
        .max()
        .unwrap_or(0);
    let mut out = Vec::with_capacity(traces.iter().map(Vec::len).sum());
    for round in 0..rounds {
        for (t, &r) in traces.iter().zip(rates) {
            let r = r as usize;
            for rec in t.iter().skip(round * r).take(r) {
                out.push(TraceRecord {
                    tick: round as Tick,
                    ..*rec
                });
            }
        }
    }
    Ok(out)
}

/// Like [`interleave`], but every trace keeps issuing from its start again
/// until the longest-running one finishes. Only each trace's first complete
/// pass is marked as measured.
pub fn rerun_until_longest(traces: &[Vec<TraceRecord>], rates: &[u32]) -> Result<Vec<Scheduled>> {
    check_rates(traces, rates)?;
    let rounds = traces
        .iter()
        .zip(rates)
        .map(|(t, &r)| t.len().div_ceil(r as usize))
        .max()
        .unwrap_or(0);
    let mut out = Vec::new();
    for round in 0..rounds {
        for (t, &r) in traces.iter().zip(rates) {
            if t.is_empty() {
                continue;
            }
            let r = r as usize;
            for k in round * r..(round + 1) * r {
                out.push(Scheduled {
                    record: TraceRecord {
                        tick: round as Tick,
                        ..t[k % t.len()]
                    },
                    measured: k < t.len(),
                });
            }
        }
    }
    Ok(out)
}
