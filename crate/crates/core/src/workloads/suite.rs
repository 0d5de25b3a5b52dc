//! Desk-scale workload mixes.
//!
//! Each benchmark is replaced by a pattern generator sized against a 64-entry
//! (1024-page) L3 so that it lands in its intended L2-MPKI class:
//!
//! | analog | pattern | footprint | instructions per access |
//! |---|---|---|---|
//! | `mt` | Stride(16) | 96 regions, one page each | 4 |
//! | `atax`, `bicg` | Stride(4) | 320 and 288 pages, 4 per region | 4 |
//! | `st` | Block of 8-page blocks | 768 pages | 20 |
//! | `nw` | Dependent chase | 384 pages | 20 |
//! | `conv` | Stream | 1536 pages | 20 |
//! | `fft`, `fir` | Stream | 8 and 12 pages (fit in L1) | 10 |
//!
//! The `_s` variants use half the footprint. These sizes are calibration
//! choices, not measurements of the original programs.

use crate::metrics::MpkiClass;

use super::{PatternKind, PatternSpec, TenantSpec};

/// A named multi-tenant workload. Tenant `i` runs in instance `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mix {
    pub name: &'static str,
    pub category: &'static str,
    pub tenants: Vec<TenantSpec>,
}

const ACCESSES: u64 = 24_000;

fn app(name: &str, pid: u32, g_units: u32) -> TenantSpec {
    use MpkiClass::*;
    use PatternKind::*;
    let (kind, footprint, class, ipa) = match name {
        "mt" => (Stride(16), 96, H, 4),
        "mt_s" => (Stride(16), 48, H, 4),
        "atax" => (Stride(4), 320, H, 4),
        "bicg" => (Stride(4), 288, H, 4),
        "st" => (
            Block {
                block_pages: 8,
                blocks: 96,
            },
            768,
            M,
            20,
        ),
        "st_s" => (
            Block {
                block_pages: 8,
                blocks: 48,
            },
            384,
            M,
            20,
        ),
        "nw" => (Dependent, 384, M, 20),
        "conv" => (Stream, 1536, M, 20),
        "fft" => (Stream, 8, L, 10),
        "fir" => (Stream, 12, L, 10),
        other => panic!("unknown application analog `{other}`"),
    };
    TenantSpec {
        instructions_per_access: ipa,
        ..TenantSpec::new(pid, g_units, PatternSpec::new(kind, footprint, ACCESSES))
            .with_class(class)
            .with_cores(1, 1)
    }
}

fn mix(name: &'static str, category: &'static str, apps: &[&str], sizes: &[u32]) -> Mix {
    Mix {
        name,
        category,
        tenants: apps
            .iter()
            .zip(sizes)
            .enumerate()
            .map(|(i, (a, &g))| app(a, 100 + i as u32, g))
            .collect(),
    }
}

/// Nine three-tenant mixes, `w1` (HHH) through `w9` (LLL), each on a 3/2/2
/// instance split.
pub fn suite() -> Vec<Mix> {
    let g = [3, 2, 2];
    vec![
        mix("w1", "HHH", &["mt", "atax", "bicg"], &g),
        mix("w2", "HHM", &["mt", "atax", "st"], &g),
        mix("w3", "HMM", &["mt", "nw", "st"], &g),
        mix("w4", "HML", &["mt_s", "st_s", "fir"], &g),
        mix("w5", "HLL", &["mt_s", "fft", "fir"], &g),
        mix("w6", "MMM", &["nw", "conv", "st_s"], &g),
        mix("w7", "MML", &["st_s", "nw", "fft"], &g),
        mix("w8", "MLL", &["st_s", "fir", "fft"], &g),
        mix("w9", "LLL", &["fft", "fft", "fir"], &g),
    ]
}

impl Mix {
    pub fn by_name(name: &str) -> Option<Mix> {
        suite()
            .into_iter()
            .chain([Mix::contended_pair(), Mix::hml()])
            .find(|m| m.name == name)
    }

    /// A stride-heavy H tenant against a streaming M tenant.
    pub fn contended_pair() -> Mix {
        mix("pair", "HM", &["mt", "conv"], &[4, 3])
    }

    /// One tenant of each class on a 3/2/2 split.
    pub fn hml() -> Mix {
        mix("hml", "HML", &["mt_s", "st_s", "fir"], &[3, 2, 2])
    }
}
