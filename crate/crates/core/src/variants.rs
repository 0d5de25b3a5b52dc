//! L3 policy variants: the conventional TLB, two- and four-base sharing,
//! half-sub-entry geometries and static way partitioning.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::addr::{PageConfig, TlbGeometry};
use crate::error::{Error, Result};
use crate::tlb::{ProbeLatency, StarConfig, StarTlb, SubEntryTlb, TranslationBuffer, WayPartition};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    #[default]
    Baseline,
    Star2,
    Star4,
    /// 8 sub-entries per entry, twice the sets.
    HalfSubDoubleSet,
    /// 8 sub-entries per entry, twice the ways, probed in two rounds.
    HalfSubDoubleWaySeq,
    /// 8 sub-entries per entry, twice the ways, probed at once.
    HalfSubDoubleWayPara,
    /// Conventional TLB with ways split between instances by size.
    StaticPartition,
    /// Two-base sharing inside statically partitioned ways.
    Star2Static,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 8] = [
        PolicyKind::Baseline,
        PolicyKind::Star2,
        PolicyKind::Star4,
        PolicyKind::HalfSubDoubleSet,
        PolicyKind::HalfSubDoubleWaySeq,
        PolicyKind::HalfSubDoubleWayPara,
        PolicyKind::StaticPartition,
        PolicyKind::Star2Static,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Baseline => "baseline",
            PolicyKind::Star2 => "star2",
            PolicyKind::Star4 => "star4",
            PolicyKind::HalfSubDoubleSet => "half-sub-double-set",
            PolicyKind::HalfSubDoubleWaySeq => "half-sub-double-way-seq",
            PolicyKind::HalfSubDoubleWayPara => "half-sub-double-way-para",
            PolicyKind::StaticPartition => "static-partition",
            PolicyKind::Star2Static => "star2-static",
        }
    }

    pub fn is_partitioned(self) -> bool {
        matches!(self, PolicyKind::StaticPartition | PolicyKind::Star2Static)
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PolicyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown policy `{s}`")))
    }
}

/// L3 geometry and probe model for `kind`, derived from the conventional one.
pub fn make_geometry(kind: PolicyKind, base: TlbGeometry) -> Result<(TlbGeometry, ProbeLatency)> {
    let half = |g: TlbGeometry| TlbGeometry {
        subentries_per_entry: g.subentries_per_entry / 2,
        ..g
    };
    let (geom, probe) = match kind {
        PolicyKind::HalfSubDoubleSet => (
            TlbGeometry {
                sets: base.sets * 2,
                ..half(base)
            },
            ProbeLatency::Parallel,
        ),
        PolicyKind::HalfSubDoubleWaySeq => (
            TlbGeometry {
                ways: base.ways * 2,
                ..half(base)
            },
            ProbeLatency::TwoPhase,
        ),
        PolicyKind::HalfSubDoubleWayPara => (
            TlbGeometry {
                ways: base.ways * 2,
                ..half(base)
            },
            ProbeLatency::Parallel,
        ),
        _ => (base, ProbeLatency::Parallel),
    };
    geom.validate("l3")?;
    Ok((geom, probe))
}

/// Split `ways` among instances in proportion to their sizes.
///
/// Uses largest-remainder rounding (ties to the earlier instance) and then
/// guarantees every instance at least one way.
pub fn static_partition_map(instance_sizes: &[u32], ways: u32) -> Result<Vec<u32>> {
    let n = instance_sizes.len();
    if n == 0 {
        return Err(Error::Config("static partitioning needs at least one instance".into()));
    }
    if n as u32 > ways {
        return Err(Error::Config(format!(
            "{n} instances cannot each get a way out of {ways}"
        )));
    }
    let total: u64 = instance_sizes.iter().map(|&g| g as u64).sum();
    if total == 0 {
        return Err(Error::Config("instance sizes sum to zero".into()));
    }
    let mut alloc: Vec<u32> = Vec::with_capacity(n);
    let mut rem: Vec<(u64, usize)> = Vec::with_capacity(n);
    for (i, &g) in instance_sizes.iter().enumerate() {
        let num = ways as u64 * g as u64;
        alloc.push((num / total) as u32);
        rem.push((num % total, i));
    }
    let left = ways - alloc.iter().sum::<u32>();
    rem.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, i) in rem.iter().cycle().take(left as usize) {
        alloc[i] += 1;
    }
    // Take from the largest share for anyone rounded down to nothing.
    while let Some(i) = alloc.iter().position(|&a| a == 0) {
        let donor = (0..n)
            .max_by_key(|&j| (alloc[j], std::cmp::Reverse(j)))
            .expect("nonempty");
        alloc[donor] -= 1;
        alloc[i] = 1;
    }
    Ok(alloc)
}

/// Build the shared L3 for `kind`. `instance_sizes` feeds static partitioning.
pub fn build_l3(
    kind: PolicyKind,
    base: TlbGeometry,
    page: PageConfig,
    instance_sizes: &[u32],
) -> Result<Box<dyn TranslationBuffer>> {
    let (geom, probe) = make_geometry(kind, base)?;
    let partition = if kind.is_partitioned() {
        Some(WayPartition::from_counts(&static_partition_map(
            instance_sizes,
            geom.ways,
        )?))
    } else {
        None
    };
    let star = |cfg: StarConfig| -> Result<Box<dyn TranslationBuffer>> {
        if geom.subentries_per_entry != 16 {
            return Err(Error::Config(format!(
                "policy {kind} needs 16 sub-entries per L3 entry, got {}",
                geom.subentries_per_entry
            )));
        }
        Ok(Box::new(StarTlb::new(geom, page, cfg)))
    };
    match kind {
        PolicyKind::Star2 => star(StarConfig::two_base()),
        PolicyKind::Star4 => star(StarConfig::four_base()),
        PolicyKind::Star2Static => star(StarConfig {
            partition,
            ..StarConfig::two_base()
        }),
        _ => {
            let mut t = SubEntryTlb::new(geom, page).with_probe_latency(probe);
            if let Some(p) = partition {
                t = t.with_partition(p);
            }
            Ok(Box::new(t))
        }
    }
}
