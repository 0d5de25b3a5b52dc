//! Measurement instruments: hit rates, MPKI, reuse distance, eviction-time
//! utilization, latency and storage accounting.

mod report;
mod reuse;
mod utilization;

pub use report::{
    AggregateReport, HitStats, LatencySummary, ReuseSummary, RunReport, TenantReport,
    REPORT_SCHEMA_VERSION,
};
pub use reuse::{reuse_distance_stream, ReuseEvent, ReuseHistogram, ReuseTracker};
pub use utilization::{utilization_stats, EvictionSample, UtilizationStats, CDF_STEPS};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hierarchy::CompletedRequest;
use crate::variants::PolicyKind;

/// L2-miss intensity class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MpkiClass {
    /// MPKI < 1
    L,
    /// 1 <= MPKI <= 100
    M,
    /// MPKI > 100
    H,
}

impl MpkiClass {
    pub fn of(mpki: f64) -> Self {
        if mpki < 1.0 {
            MpkiClass::L
        } else if mpki > 100.0 {
            MpkiClass::H
        } else {
            MpkiClass::M
        }
    }
}

/// Misses per thousand instructions and its class.
pub fn mpki(misses: u64, instructions: u64) -> Result<(f64, MpkiClass)> {
    if instructions == 0 {
        return Err(Error::ZeroInstructions);
    }
    let v = 1000.0 * misses as f64 / instructions as f64;
    Ok((v, MpkiClass::of(v)))
}

const VALID_DIRTY_BITS: u32 = 2;
const VPB_BITS: u32 = 30;
const PFN_BITS: u32 = 52;

/// Storage bits of one L3 entry under `kind`.
///
/// An exclusive entry holds v/d bits, a VPB and one frame number per
/// sub-entry. Two-base sharing adds a 2-bit layout field, one AIB per
/// sub-entry and a second VPB with its own v/d bits. Four-base sharing uses a
/// 3-bit layout field, two AIB bits per sub-entry and three extra bases.
pub fn bits_per_entry(kind: PolicyKind) -> u32 {
    let exclusive = |sub: u32| VALID_DIRTY_BITS + VPB_BITS + sub * PFN_BITS;
    let extra_base = VPB_BITS + VALID_DIRTY_BITS;
    match kind {
        PolicyKind::Baseline | PolicyKind::StaticPartition => exclusive(16),
        PolicyKind::Star2 | PolicyKind::Star2Static => exclusive(16) + 2 + 16 + extra_base,
        PolicyKind::Star4 => exclusive(16) + 3 + 16 * 2 + 3 * extra_base,
        PolicyKind::HalfSubDoubleSet
        | PolicyKind::HalfSubDoubleWaySeq
        | PolicyKind::HalfSubDoubleWayPara => exclusive(8),
    }
}

/// Per-pid translation latency summaries over completed requests.
pub fn latency_report<'a, I>(completed: I) -> BTreeMap<u32, LatencySummary>
where
    I: IntoIterator<Item = &'a CompletedRequest>,
{
    let mut per_pid: BTreeMap<u32, Vec<u64>> = BTreeMap::new();
    for r in completed {
        per_pid.entry(r.who.process_id).or_default().push(r.latency());
    }
    per_pid
        .into_iter()
        .map(|(pid, lats)| (pid, LatencySummary::from_latencies(lats)))
        .collect()
}
