//! Virtual address decomposition shared by every TLB model.
//!
//! A virtual page number is split high to low as `[vpb | set_index | sub_index]`,
//! so the `region_pages` consecutive pages of one aligned region land in the
//! sub-entries of a single TLB entry and consecutive regions walk across sets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Simulation time in cycles.
pub type Tick = u64;

/// Page size and the number of pages grouped under one TLB entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PageConfig {
    pub page_size_bytes: u64,
    pub region_pages: u32,
}

impl Default for PageConfig {
    fn default() -> Self {
        Self {
            page_size_bytes: 64 * 1024,
            region_pages: 16,
        }
    }
}

impl PageConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.page_size_bytes.is_power_of_two() {
            return Err(Error::Config(format!(
                "page.page_size_bytes must be a power of two, got {}",
                self.page_size_bytes
            )));
        }
        if !self.region_pages.is_power_of_two() {
            return Err(Error::Config(format!(
                "page.region_pages must be a power of two, got {}",
                self.region_pages
            )));
        }
        Ok(())
    }

    pub fn offset_bits(&self) -> u32 {
        self.page_size_bytes.trailing_zeros()
    }

    pub fn sub_bits(&self) -> u32 {
        self.region_pages.trailing_zeros()
    }

    /// Bytes covered by one aligned region (1 MB with the defaults).
    pub fn region_bytes(&self) -> u64 {
        self.page_size_bytes * self.region_pages as u64
    }

    /// Same page size with a different number of pages per entry.
    pub fn with_region_pages(self, region_pages: u32) -> Self {
        Self {
            region_pages,
            ..self
        }
    }

    pub fn page_number(&self, vaddr: u64) -> u64 {
        vaddr >> self.offset_bits()
    }
}

/// Shape and probe cost of one set-associative TLB level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TlbGeometry {
    pub sets: u32,
    pub ways: u32,
    pub subentries_per_entry: u32,
    pub lookup_latency_cycles: u64,
}

impl TlbGeometry {
    pub const fn new(sets: u32, ways: u32, subentries_per_entry: u32, latency: u64) -> Self {
        Self {
            sets,
            ways,
            subentries_per_entry,
            lookup_latency_cycles: latency,
        }
    }

    /// L1: 16 entries, 16-way, one page per entry, 1-cycle lookup.
    pub const fn default_l1() -> Self {
        Self::new(1, 16, 1, 1)
    }

    /// L2: 128 entries, 8-way, 16 sub-entries, 10-cycle lookup.
    pub const fn default_l2() -> Self {
        Self::new(16, 8, 16, 10)
    }

    /// L3: 1024 entries, 8-way, 16 sub-entries, 40-cycle lookup.
    pub const fn default_l3() -> Self {
        Self::new(128, 8, 16, 40)
    }

    pub fn entries(&self) -> u64 {
        self.sets as u64 * self.ways as u64
    }

    pub fn total_subentries(&self) -> u64 {
        self.entries() * self.subentries_per_entry as u64
    }

    pub fn set_bits(&self) -> u32 {
        self.sets.trailing_zeros()
    }

    pub fn validate(&self, name: &str) -> Result<()> {
        for (field, v) in [
            ("sets", self.sets),
            ("ways", self.ways),
            ("subentries_per_entry", self.subentries_per_entry),
        ] {
            if v == 0 || !v.is_power_of_two() {
                return Err(Error::Config(format!(
                    "{name}.{field} must be a nonzero power of two, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Page layout seen by this level: one entry spans `subentries_per_entry` pages.
    pub fn page_config(&self, page: PageConfig) -> PageConfig {
        page.with_region_pages(self.subentries_per_entry)
    }
}

/// Which tenant issued a translation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RequestIdentity {
    pub instance_id: u16,
    pub process_id: u32,
}

impl RequestIdentity {
    pub const fn new(instance_id: u16, process_id: u32) -> Self {
        Self {
            instance_id,
            process_id,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DecomposedAddress {
    pub offset: u64,
    pub sub_index: u32,
    pub set_index: u32,
    pub vpb: u64,
}

/// Split `vaddr` into `(vpb, set_index, sub_index, offset)`.
///
/// The number of sub-index bits comes from `page.region_pages`; the set index
/// width from `geom.sets`.
pub fn decompose(vaddr: u64, page: PageConfig, geom: &TlbGeometry) -> DecomposedAddress {
    let off_bits = page.offset_bits();
    let sub_bits = page.sub_bits();
    let set_bits = geom.set_bits();
    let offset = vaddr & low_mask(off_bits);
    let vpn = vaddr.checked_shr(off_bits).unwrap_or(0);
    let sub_index = (vpn & low_mask(sub_bits)) as u32;
    let above_sub = vpn.checked_shr(sub_bits).unwrap_or(0);
    let set_index = (above_sub & low_mask(set_bits)) as u32;
    let vpb = above_sub.checked_shr(set_bits).unwrap_or(0);
    DecomposedAddress {
        offset,
        sub_index,
        set_index,
        vpb,
    }
}

/// Inverse of [`decompose`]. Fails if any field is wider than its slot.
pub fn recompose(d: &DecomposedAddress, page: PageConfig, geom: &TlbGeometry) -> Result<u64> {
    let off_bits = page.offset_bits();
    let sub_bits = page.sub_bits();
    let set_bits = geom.set_bits();
    let vpb_bits = 64u32.saturating_sub(off_bits + sub_bits + set_bits);
    let check = |name: &'static str, v: u64, bits: u32| {
        if v & !low_mask(bits) != 0 {
            Err(Error::FieldWidth {
                field: name,
                value: v,
                bits,
            })
        } else {
            Ok(())
        }
    };
    check("offset", d.offset, off_bits)?;
    check("sub_index", d.sub_index as u64, sub_bits)?;
    check("set_index", d.set_index as u64, set_bits)?;
    check("vpb", d.vpb, vpb_bits)?;
    let vpn = (((d.vpb << set_bits) | d.set_index as u64) << sub_bits) | d.sub_index as u64;
    Ok((vpn << off_bits) | d.offset)
}

fn low_mask(bits: u32) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}
