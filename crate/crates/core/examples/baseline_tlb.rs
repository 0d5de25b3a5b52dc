//! A conventional sub-entry TLB: one base per entry, LRU replacement, and a
//! utilization sample each time an entry is evicted.

use star_tlb::addr::{PageConfig, RequestIdentity, TlbGeometry};
use star_tlb::metrics::utilization_stats;
use star_tlb::tlb::{SubEntryTlb, TranslationBuffer};

const PAGE: u64 = 64 * 1024;

fn main() {
    // Two sets of two ways: four regions fit.
    let mut tlb = SubEntryTlb::new(TlbGeometry::new(2, 2, 16, 40), PageConfig::default());
    let who = RequestIdentity::new(0, 1);

    // Touch one page in each of eight regions, twice over.
    for lap in 0..2 {
        for region in 0..8u64 {
            let va = region * 16 * PAGE;
            let r = tlb.lookup(va, who, 0);
            if r.pfn.is_none() {
                tlb.insert(va, region, who, 0);
            }
            println!("lap {lap} region {region}: {:?}", r.kind);
        }
    }
    let stats = utilization_stats(&tlb.take_evictions());
    println!(
        "{} evictions, mean utilization {:.3}",
        stats.evictions,
        stats.average.unwrap_or(0.0)
    );
}
