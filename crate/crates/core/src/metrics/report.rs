//! Run reports: one JSON document per run and a long-format CSV with one row
//! per metric per pid.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::hierarchy::{GlobalCounters, GmmuCounters, LevelCounters};
use crate::tlb::TlbCounters;
use crate::variants::PolicyKind;

use super::{MpkiClass, UtilizationStats};

/// Bumped whenever a field of [`RunReport`] changes meaning or disappears.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct HitStats {
    pub probes: u64,
    pub hits: u64,
    /// Absent when the level was never probed.
    pub hit_rate: Option<f64>,
}

impl HitStats {
    pub fn new(probes: u64, hits: u64) -> Self {
        Self {
            probes,
            hits,
            hit_rate: (probes > 0).then(|| hits as f64 / probes as f64),
        }
    }

    pub fn misses(&self) -> u64 {
        self.probes - self.hits
    }
}

impl From<LevelCounters> for HitStats {
    fn from(c: LevelCounters) -> Self {
        Self::new(c.probes, c.hits)
    }
}

impl std::ops::Add for HitStats {
    type Output = HitStats;

    fn add(self, o: HitStats) -> HitStats {
        HitStats::new(self.probes + o.probes, self.hits + o.hits)
    }
}

/// Translation latency distribution of completed requests.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LatencySummary {
    pub requests: u64,
    pub mean: f64,
    pub p50: u64,
    pub p95: u64,
    pub p99: u64,
    pub max: u64,
    /// Sum of all latencies. Coalesced requests count in full. This is a
    /// stall proxy, not an application speedup.
    pub stall_proxy: u64,
}

impl LatencySummary {
    pub fn from_latencies(mut lats: Vec<u64>) -> Self {
        if lats.is_empty() {
            return Self::default();
        }
        lats.sort_unstable();
        let n = lats.len();
        // Nearest-rank percentile.
        let pct = |p: usize| lats[(p * n).div_ceil(100).max(1) - 1];
        let sum: u64 = lats.iter().sum();
        Self {
            requests: n as u64,
            mean: sum as f64 / n as f64,
            p50: pct(50),
            p95: pct(95),
            p99: pct(99),
            max: lats[n - 1],
            stall_proxy: sum,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReuseSummary {
    pub reuses: u64,
    /// `(distance, cumulative fraction)` at every distinct distance.
    pub cdf: Vec<(u64, f64)>,
    /// Fraction of reuses shorter than the L3 sub-entry count.
    pub within_l3_reach: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TenantReport {
    pub pid: u32,
    pub instance_id: u16,
    pub g_units: u32,
    pub nominal_class: Option<MpkiClass>,
    /// Measured requests (first pass only).
    pub requests: u64,
    pub instructions: u64,
    pub l1: HitStats,
    pub l2: HitStats,
    pub l3: HitStats,
    pub walks: u64,
    pub l2_mpki: Option<f64>,
    pub class: Option<MpkiClass>,
    pub l1_coalesced: u64,
    pub l2_coalesced: u64,
    pub mshr_stalls: u64,
    pub latency: LatencySummary,
    pub utilization: UtilizationStats,
    pub reuse: ReuseSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub requests: u64,
    pub l1: HitStats,
    pub l2: HitStats,
    pub l3: HitStats,
    pub walks: u64,
    pub latency: LatencySummary,
    pub utilization: UtilizationStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub policy: PolicyKind,
    pub seed: u64,
    pub bits_per_entry: u32,
    pub l3_subentries: u64,
    /// The configuration that produced this report.
    pub config: serde_json::Value,
    pub tenants: Vec<TenantReport>,
    pub aggregate: AggregateReport,
    pub l3_counters: TlbCounters,
    pub gmmu: GmmuCounters,
    pub totals: GlobalCounters,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn common_rows(
    rows: &mut Vec<[String; 3]>,
    pid: &str,
    requests: u64,
    levels: [(&str, &HitStats); 3],
    walks: u64,
    lat: &LatencySummary,
    util: &UtilizationStats,
) {
    let mut push = |m: &str, v: String| rows.push([pid.to_string(), m.to_string(), v]);
    push("requests", requests.to_string());
    for (name, h) in levels {
        push(&format!("{name}_probes"), h.probes.to_string());
        push(&format!("{name}_hits"), h.hits.to_string());
        push(&format!("{name}_hit_rate"), opt(h.hit_rate));
    }
    push("walks", walks.to_string());
    push("latency_mean", lat.mean.to_string());
    push("latency_p50", lat.p50.to_string());
    push("latency_p95", lat.p95.to_string());
    push("latency_p99", lat.p99.to_string());
    push("latency_max", lat.max.to_string());
    push("stall_proxy", lat.stall_proxy.to_string());
    push("evictions", util.evictions.to_string());
    push("utilization_avg", opt(util.average));
    for (k, c) in util.cdf.iter().enumerate() {
        push(&format!("utilization_cdf_{k:02}"), c.to_string());
    }
}

impl RunReport {
    pub fn tenant(&self, pid: u32) -> Option<&TenantReport> {
        self.tenants.iter().find(|t| t.pid == pid)
    }

    pub fn pids(&self) -> Vec<u32> {
        self.tenants.iter().map(|t| t.pid).collect()
    }

    pub fn to_json_string(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json_string()?)?;
        Ok(())
    }

    /// `(pid, metric, value)` rows; the aggregate uses pid `all`. Absent
    /// values are empty strings.
    pub fn csv_rows(&self) -> Vec<[String; 3]> {
        let mut rows = Vec::new();
        for t in &self.tenants {
            let pid = t.pid.to_string();
            common_rows(
                &mut rows,
                &pid,
                t.requests,
                [("l1", &t.l1), ("l2", &t.l2), ("l3", &t.l3)],
                t.walks,
                &t.latency,
                &t.utilization,
            );
            let mut push = |m: &str, v: String| rows.push([pid.clone(), m.to_string(), v]);
            push("instance", t.instance_id.to_string());
            push("instructions", t.instructions.to_string());
            push("l2_mpki", opt(t.l2_mpki));
            push(
                "class",
                t.class.map(|c| format!("{c:?}")).unwrap_or_default(),
            );
            push("l1_coalesced", t.l1_coalesced.to_string());
            push("l2_coalesced", t.l2_coalesced.to_string());
            push("mshr_stalls", t.mshr_stalls.to_string());
            push("reuses", t.reuse.reuses.to_string());
            push("reuse_within_l3_reach", opt(t.reuse.within_l3_reach));
        }
        let a = &self.aggregate;
        common_rows(
            &mut rows,
            "all",
            a.requests,
            [("l1", &a.l1), ("l2", &a.l2), ("l3", &a.l3)],
            a.walks,
            &a.latency,
            &a.utilization,
        );
        rows
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["pid", "metric", "value"])?;
        for r in self.csv_rows() {
            w.write_record(&r)?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = BufWriter::new(File::create(path)?);
        f.write_all(self.to_csv_string()?.as_bytes())?;
        f.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_rank_percentiles() {
        let s = LatencySummary::from_latencies((1..=100).collect());
        assert_eq!((s.p50, s.p95, s.p99, s.max), (50, 95, 99, 100));
        assert_eq!(s.mean, 50.5);
        let one = LatencySummary::from_latencies(vec![451]);
        assert_eq!((one.p50, one.p99), (451, 451));
        assert_eq!(LatencySummary::from_latencies(vec![]).requests, 0);
    }

    #[test]
    fn hit_stats_add_up() {
        let h = HitStats::new(3, 1) + HitStats::new(1, 1);
        assert_eq!((h.probes, h.hits, h.misses()), (4, 2, 2));
        assert_eq!(h.hit_rate, Some(0.5));
        assert_eq!(HitStats::new(0, 0).hit_rate, None);
    }
}
