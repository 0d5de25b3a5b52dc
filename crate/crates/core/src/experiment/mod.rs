//! Declarative experiments: a TOML configuration in, a [`RunReport`] out.
//!
//! ```toml
//! seed = 42
//! policy = "star2"
//!
//! [geometry.l3]
//! sets = 8
//! ways = 8
//! subentries_per_entry = 16
//! lookup_latency_cycles = 40
//!
//! [[tenants]]
//! pid = 1
//! g_units = 4
//! pattern = { kind = { stride = 16 }, footprint_pages = 96, accesses = 20000 }
//! ```
//!
//! Unknown keys are rejected. Omitted sections take the full-size defaults.

mod compare;

pub use compare::{compare, Comparison, PidDelta};

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::addr::{PageConfig, RequestIdentity, TlbGeometry};
use crate::error::{Error, Result};
use crate::hierarchy::{
    CompletedRequest, GmmuConfig, Hierarchy, HierarchyConfig, InstanceConfig, MshrConfig,
};
use crate::metrics::{
    bits_per_entry, mpki, utilization_stats, AggregateReport, HitStats, LatencySummary,
    ReuseSummary, RunReport, TenantReport, REPORT_SCHEMA_VERSION,
};
use crate::variants::{make_geometry, PolicyKind};
use crate::workloads::{generate, read_trace, rerun_until_longest, Mix, Scheduled, TenantSpec, TraceRecord};

/// Compute units available to instances of one GPU.
pub const MAX_G_UNITS: u32 = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometryConfig {
    pub l1: TlbGeometry,
    pub l2: TlbGeometry,
    pub l3: TlbGeometry,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            l1: TlbGeometry::default_l1(),
            l2: TlbGeometry::default_l2(),
            l3: TlbGeometry::default_l3(),
        }
    }
}

impl GeometryConfig {
    /// Desk-scale hierarchy: an 8-entry L2 and a 64-entry (8 x 8) L3.
    pub fn scaled() -> Self {
        Self {
            l1: TlbGeometry::default_l1(),
            l2: TlbGeometry::new(2, 4, 16, 10),
            l3: TlbGeometry::new(8, 8, 16, 40),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// Directory receiving `report.json`, `report.csv` and `config.toml`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
}

fn default_seed() -> u64 {
    42
}

fn default_interval() -> u64 {
    1
}

/// Round spacing of the desk-scale mixes: slow enough that a GPC's eight
/// walkers keep up with one tenant missing on every request.
pub const SCALED_ISSUE_INTERVAL: u64 = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub policy: PolicyKind,
    /// Ticks between scheduling rounds; each round every tenant issues
    /// `intensity` requests.
    #[serde(default = "default_interval")]
    pub issue_interval: u64,
    /// Stop issuing after this many ticks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run_length: Option<u64>,
    /// Reuse distance is keyed by `page >> reuse_granularity_shift`.
    #[serde(default)]
    pub reuse_granularity_shift: u32,
    /// Read tenant traces from this file instead of generating them.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<PathBuf>,
    #[serde(default)]
    pub page: PageConfig,
    #[serde(default)]
    pub geometry: GeometryConfig,
    #[serde(default)]
    pub gmmu: GmmuConfig,
    #[serde(default)]
    pub mshr: MshrConfig,
    #[serde(default)]
    pub output: OutputConfig,
    pub tenants: Vec<TenantSpec>,
}

impl ExperimentConfig {
    pub fn new(tenants: Vec<TenantSpec>) -> Self {
        Self {
            seed: default_seed(),
            policy: PolicyKind::Baseline,
            issue_interval: default_interval(),
            run_length: None,
            reuse_granularity_shift: 0,
            trace: None,
            page: PageConfig::default(),
            geometry: GeometryConfig::default(),
            gmmu: GmmuConfig::default(),
            mshr: MshrConfig::default(),
            output: OutputConfig::default(),
            tenants,
        }
    }

    /// `mix` on the desk-scale hierarchy.
    pub fn for_mix(mix: &Mix, policy: PolicyKind, seed: u64) -> Self {
        Self {
            seed,
            policy,
            issue_interval: SCALED_ISSUE_INTERVAL,
            geometry: GeometryConfig::scaled(),
            ..Self::new(mix.tenants.clone())
        }
    }

    pub fn with_policy(self, policy: PolicyKind) -> Self {
        Self { policy, ..self }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.tenants.is_empty() {
            return Err(Error::Config("at least one tenant is required".into()));
        }
        let mut pids = BTreeSet::new();
        for t in &self.tenants {
            if !pids.insert(t.pid) {
                return Err(Error::Config(format!("pid {} appears twice", t.pid)));
            }
            if t.g_units == 0 {
                return Err(Error::Config(format!("tenant {} has zero g_units", t.pid)));
            }
            if t.instructions_per_access == 0 {
                return Err(Error::Config(format!(
                    "tenant {} has zero instructions_per_access",
                    t.pid
                )));
            }
            t.pattern.validate()?;
        }
        if self.issue_interval == 0 {
            return Err(Error::Config("issue_interval must be at least 1".into()));
        }
        let g: u32 = self.tenants.iter().map(|t| t.g_units).sum();
        if g > MAX_G_UNITS {
            return Err(Error::Config(format!(
                "instances use {g} g-units, more than the {MAX_G_UNITS} available"
            )));
        }
        self.page.validate()?;
        make_geometry(self.policy, self.geometry.l3)?;
        Ok(())
    }

    pub fn hierarchy_config(&self) -> HierarchyConfig {
        let instances = self
            .tenants
            .iter()
            .map(|t| {
                let base = InstanceConfig::with_g_units(t.g_units);
                InstanceConfig {
                    gpcs: t.gpcs.unwrap_or(base.gpcs),
                    tpcs_per_gpc: t.tpcs_per_gpc.unwrap_or(base.tpcs_per_gpc),
                    ..base
                }
            })
            .collect();
        HierarchyConfig {
            page: self.page,
            l1: self.geometry.l1,
            l2: self.geometry.l2,
            l3: self.geometry.l3,
            policy: self.policy,
            gmmu: self.gmmu,
            mshr: self.mshr,
            instances,
            reuse_granularity_shift: self.reuse_granularity_shift,
        }
    }

    /// One trace per tenant, in tenant order.
    pub fn tenant_traces(&self) -> Result<Vec<Vec<TraceRecord>>> {
        match &self.trace {
            None => self
                .tenants
                .iter()
                .enumerate()
                .map(|(i, t)| generate(t, i as u16, self.page, self.seed))
                .collect(),
            Some(path) => {
                let mut by_pid: BTreeMap<u32, Vec<TraceRecord>> = BTreeMap::new();
                for r in read_trace(path)? {
                    by_pid.entry(r.pid).or_default().push(r);
                }
                let traces = self
                    .tenants
                    .iter()
                    .enumerate()
                    .map(|(i, t)| {
                        let trace = by_pid.remove(&t.pid).unwrap_or_default();
                        match trace.iter().find(|r| r.instance_id as usize != i) {
                            Some(r) => Err(Error::Config(format!(
                                "trace puts pid {} in instance {}, config expects {i}",
                                t.pid, r.instance_id
                            ))),
                            None => Ok(trace),
                        }
                    })
                    .collect::<Result<Vec<_>>>()?;
                if let Some(pid) = by_pid.keys().next() {
                    return Err(Error::Config(format!(
                        "trace has records for pid {pid}, which is not a configured tenant"
                    )));
                }
                Ok(traces)
            }
        }
    }

    /// The full multi-tenant request stream with its measurement mask.
    pub fn schedule(&self) -> Result<Vec<Scheduled>> {
        let traces = self.tenant_traces()?;
        let rates: Vec<u32> = self.tenants.iter().map(|t| t.pattern.intensity).collect();
        let mut s = rerun_until_longest(&traces, &rates)?;
        for x in &mut s {
            x.record.tick *= self.issue_interval;
        }
        if let Some(limit) = self.run_length {
            s.retain(|x| x.record.tick < limit);
        }
        Ok(s)
    }
}

/// Drive `schedule` through a hierarchy built from `cfg`.
pub fn simulate(cfg: &ExperimentConfig, schedule: &[Scheduled]) -> Result<(Hierarchy, Vec<CompletedRequest>)> {
    let mut h = Hierarchy::new(cfg.hierarchy_config())?;
    let mut done = Vec::new();
    let mut keep = |batch: Vec<CompletedRequest>| done.extend(batch.into_iter().filter(|r| r.measured));
    let mut i = 0;
    while i < schedule.len() {
        let tick = schedule[i].record.tick;
        while i < schedule.len() && schedule[i].record.tick == tick {
            let r = schedule[i].record;
            h.submit(
                tick,
                RequestIdentity::new(r.instance_id, r.pid),
                r.vaddr,
                schedule[i].measured,
            )?;
            i += 1;
        }
        keep(h.step(tick));
    }
    keep(h.run_to_completion());
    Ok((h, done))
}

/// Run one experiment.
pub fn run(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    let schedule = cfg.schedule()?;
    let (h, done) = simulate(cfg, &schedule)?;

    let mut instructions: BTreeMap<u32, u64> = BTreeMap::new();
    for s in schedule.iter().filter(|s| s.measured) {
        *instructions.entry(s.record.pid).or_default() += s.record.weight_instructions;
    }
    let mut latencies: BTreeMap<u32, Vec<u64>> = BTreeMap::new();
    for r in &done {
        latencies.entry(r.who.process_id).or_default().push(r.latency());
    }
    let (l3_geom, _) = make_geometry(cfg.policy, cfg.geometry.l3)?;
    let reach = l3_geom.total_subentries();

    let counters = h.pid_counters();
    let mut tenants = Vec::with_capacity(cfg.tenants.len());
    for (i, t) in cfg.tenants.iter().enumerate() {
        let c = counters.get(&t.pid).cloned().unwrap_or_default();
        let instr = instructions.get(&t.pid).copied().unwrap_or(0);
        let m = mpki(c.l2.misses(), instr).ok();
        tenants.push(TenantReport {
            pid: t.pid,
            instance_id: i as u16,
            g_units: t.g_units,
            nominal_class: t.class,
            requests: c.requests,
            instructions: instr,
            l1: c.l1.into(),
            l2: c.l2.into(),
            l3: c.l3.into(),
            walks: c.walks,
            l2_mpki: m.map(|(v, _)| v),
            class: m.map(|(_, k)| k),
            l1_coalesced: c.l1_coalesced,
            l2_coalesced: c.l2_coalesced,
            mshr_stalls: c.mshr_stalls,
            latency: LatencySummary::from_latencies(latencies.remove(&t.pid).unwrap_or_default()),
            utilization: utilization_stats(h.evictions().iter().filter(|s| s.pid == t.pid)),
            reuse: ReuseSummary {
                reuses: c.reuse.total(),
                cdf: c.reuse.cdf(),
                within_l3_reach: c.reuse.fraction_below(reach),
            },
        });
    }

    let sum = |f: fn(&TenantReport) -> HitStats| {
        tenants.iter().map(f).fold(HitStats::default(), |a, b| a + b)
    };
    let aggregate = AggregateReport {
        requests: tenants.iter().map(|t| t.requests).sum(),
        l1: sum(|t| t.l1),
        l2: sum(|t| t.l2),
        l3: sum(|t| t.l3),
        walks: tenants.iter().map(|t| t.walks).sum(),
        latency: LatencySummary::from_latencies(done.iter().map(|r| r.latency()).collect()),
        utilization: utilization_stats(h.evictions()),
    };

    Ok(RunReport {
        schema_version: REPORT_SCHEMA_VERSION,
        policy: cfg.policy,
        seed: cfg.seed,
        bits_per_entry: bits_per_entry(cfg.policy),
        l3_subentries: reach,
        config: serde_json::to_value(cfg)?,
        tenants,
        aggregate,
        l3_counters: h.l3_counters(),
        gmmu: h.gmmu_counters(),
        totals: h.totals(),
    })
}

/// Run independent experiments on a pool of `threads` workers. Results keep
/// the input order.
pub fn run_many(cfgs: &[ExperimentConfig], threads: usize) -> Result<Vec<Result<RunReport>>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(|| cfgs.par_iter().map(run).collect()))
}

/// Write `report.json`, `report.csv` and the `config.toml` echo into `dir`.
pub fn write_outputs(report: &RunReport, cfg: &ExperimentConfig, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    report.write_json(&dir.join("report.json"))?;
    report.write_csv(&dir.join("report.csv"))?;
    std::fs::write(dir.join("config.toml"), cfg.to_toml_string()?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workloads::{PatternKind, PatternSpec};

    fn small() -> ExperimentConfig {
        let t = TenantSpec::new(1, 1, PatternSpec::new(PatternKind::Stream, 64, 500));
        ExperimentConfig {
            geometry: GeometryConfig::scaled(),
            ..ExperimentConfig::new(vec![t])
        }
    }

    #[test]
    fn toml_round_trip() {
        let cfg = small().with_policy(PolicyKind::Star2);
        let text = cfg.to_toml_string().unwrap();
        assert_eq!(ExperimentConfig::from_toml_str(&text).unwrap(), cfg);
    }

    #[test]
    fn unknown_key_is_named() {
        let text = "seed = 1\nbogus_knob = 3\n[[tenants]]\npid = 1\ng_units = 1\npattern = { kind = \"stream\", footprint_pages = 4, accesses = 4 }\n";
        let e = ExperimentConfig::from_toml_str(text).unwrap_err().to_string();
        assert!(e.contains("bogus_knob"), "{e}");
    }

    #[test]
    fn g_units_are_limited() {
        let mut cfg = small();
        cfg.tenants[0].g_units = 8;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn counts_reconcile() {
        let r = run(&small()).unwrap();
        let t = &r.tenants[0];
        assert_eq!(t.requests, 500);
        assert_eq!(t.l1.probes, 500);
        assert_eq!(t.latency.requests, 500);
        assert_eq!(r.totals.l3_misses, r.totals.walks_started);
        assert_eq!(t.l3.misses(), t.walks);
    }
}
