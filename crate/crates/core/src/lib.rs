//! Trace-driven simulator for the shared L3 TLB of a partitioned GPU.
//!
//! The L3 is modeled at sub-entry granularity: one entry covers an aligned
//! region of pages and holds one frame number per page. Besides the
//! conventional organization the crate models dynamic sub-entry sharing,
//! where an under-used entry is split between two (or four) base addresses,
//! plus the comparison points built around it. Requests flow through per-TPC
//! L1 TLBs, per-GPC L2 TLBs with MSHR coalescing, the shared L3 and a page
//! walker model, and every run produces a [`metrics::RunReport`].
//!
//! ```
//! use star_tlb::addr::{decompose, PageConfig, TlbGeometry};
//!
//! let d = decompose(0x1234_5678, PageConfig::default(), &TlbGeometry::default_l3());
//! assert_eq!((d.offset, d.sub_index, d.set_index, d.vpb), (0x5678, 4, 0x23, 2));
//! ```

pub mod addr;
pub mod error;
pub mod experiment;
pub mod hierarchy;
pub mod metrics;
pub mod tlb;
pub mod variants;
pub mod workloads;

pub use error::{Error, Result};
