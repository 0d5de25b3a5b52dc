//! Sub-entry layouts for shared entries.
//!
//! When `k` bases share an entry of 16 slots, each base keeps `16 / k` slots
//! addressed by a local index, and the remaining bits of the 4-bit sub-entry
//! index are stored in the slot as the address-identify bits (AIB).
//!
//! * Sequential: local index = low bits, AIB = high bits, bases own
//!   contiguous blocks of slots in join order.
//! * Stride: local index = high bits, AIB = low bits, bases are interleaved
//!   with stride `k`.

use serde::{Deserialize, Serialize};

pub const SLOTS: usize = 16;

/// Two-bit layout state of an entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LayoutMode {
    NonShared,
    Sequential,
    Stride,
}

impl LayoutMode {
    pub fn bits(self) -> u8 {
        match self {
            LayoutMode::NonShared => 0b00,
            LayoutMode::Sequential => 0b01,
            LayoutMode::Stride => 0b10,
        }
    }

    pub fn from_bits(bits: u8) -> Option<Self> {
        match bits {
            0b00 => Some(LayoutMode::NonShared),
            0b01 => Some(LayoutMode::Sequential),
            0b10 => Some(LayoutMode::Stride),
            _ => None,
        }
    }
}

/// Position of a base within a two-base entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BaseRole {
    /// The base that held the entry before it was shared.
    Incumbent,
    /// The base admitted by sharing.
    Joiner,
}

impl BaseRole {
    pub fn ordinal(self) -> usize {
        match self {
            BaseRole::Incumbent => 0,
            BaseRole::Joiner => 1,
        }
    }
}

fn degree_bits(degree: usize) -> u32 {
    debug_assert!(degree == 2 || degree == 4, "sharing degree {degree}");
    degree.trailing_zeros()
}

/// Physical slot and AIB for `sub_index` of the base at `ordinal` in an entry
/// shared `degree` ways.
///
/// Panics if `layout` is [`LayoutMode::NonShared`].
pub fn slot_map_degree(
    layout: LayoutMode,
    degree: usize,
    ordinal: usize,
    sub_index: u32,
) -> (usize, u8) {
    let aib_bits = degree_bits(degree);
    let local_bits = 4 - aib_bits;
    let per_base = SLOTS / degree;
    let sub = sub_index as usize & (SLOTS - 1);
    match layout {
        LayoutMode::Sequential => {
            let local = sub & ((1 << local_bits) - 1);
            let aib = sub >> local_bits;
            (ordinal * per_base + local, aib as u8)
        }
        LayoutMode::Stride => {
            let local = sub >> aib_bits;
            let aib = sub & ((1 << aib_bits) - 1);
            (degree * local + ordinal, aib as u8)
        }
        LayoutMode::NonShared => panic!("slot_map called on a non-shared entry"),
    }
}

/// Two-base slot mapping.
pub fn slot_map(layout: LayoutMode, role: BaseRole, sub_index: u32) -> (usize, u8) {
    slot_map_degree(layout, 2, role.ordinal(), sub_index)
}

/// Local index within its base of physical slot `phys`.
pub fn local_of(layout: LayoutMode, degree: usize, phys: usize) -> usize {
    match layout {
        LayoutMode::Sequential => phys % (SLOTS / degree),
        LayoutMode::Stride => phys / degree,
        LayoutMode::NonShared => phys,
    }
}

/// Base ordinal owning physical slot `phys`.
pub fn owner_of(layout: LayoutMode, degree: usize, phys: usize) -> usize {
    match layout {
        LayoutMode::Sequential => phys / (SLOTS / degree),
        LayoutMode::Stride => phys % degree,
        LayoutMode::NonShared => 0,
    }
}

/// Rebuild the 4-bit sub-entry index from a local index and its AIB.
pub fn reconstruct_index(layout: LayoutMode, degree: usize, local: usize, aib: u8) -> u32 {
    let aib_bits = degree_bits(degree);
    let local_bits = 4 - aib_bits;
    let v = match layout {
        LayoutMode::Sequential => ((aib as usize) << local_bits) | local,
        LayoutMode::Stride => (local << aib_bits) | aib as usize,
        LayoutMode::NonShared => local,
    };
    v as u32
}

/// Physical slots writable by the base at `ordinal`.
pub fn slots_of(layout: LayoutMode, degree: usize, ordinal: usize) -> impl Iterator<Item = usize> {
    (0..SLOTS).filter(move |&p| owner_of(layout, degree, p) == ordinal)
}

/// Layout for an entry about to be shared, from its current occupancy.
///
/// A gap-free run of occupied indices (including a single index) selects
/// [`LayoutMode::Sequential`]; anything else selects [`LayoutMode::Stride`].
/// Panics on an empty mask.
pub fn choose_layout(occupied_mask: u16) -> LayoutMode {
    assert!(occupied_mask != 0, "choose_layout on an empty entry");
    let lo = occupied_mask.trailing_zeros();
    let hi = 15 - occupied_mask.leading_zeros();
    if hi - lo + 1 == occupied_mask.count_ones() {
        LayoutMode::Sequential
    } else {
        LayoutMode::Stride
    }
}

/// Three-bit layout indicator used when up to four bases may share.
///
/// Bit 2 marks four-way sharing, bits 1..0 carry the [`LayoutMode`]. Only
/// `000`, `001`, `010`, `101` and `110` are valid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Layout3 {
    pub four_way: bool,
    pub mode: LayoutMode,
}

impl Layout3 {
    pub fn encode(self) -> u8 {
        ((self.four_way as u8) << 2) | self.mode.bits()
    }

    pub fn decode(bits: u8) -> Option<Self> {
        if bits > 0b111 {
            return None;
        }
        let four_way = bits & 0b100 != 0;
        let mode = LayoutMode::from_bits(bits & 0b11)?;
        if four_way && mode == LayoutMode::NonShared {
            return None;
        }
        Some(Self { four_way, mode })
    }
}
