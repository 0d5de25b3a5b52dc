//! Latency of a request at each level of the translation hierarchy, plus
//! coalescing of concurrent misses to one page.

use star_tlb::addr::RequestIdentity;
use star_tlb::hierarchy::{Hierarchy, HierarchyConfig, InstanceConfig};

const PAGE: u64 = 64 * 1024;

fn main() -> star_tlb::Result<()> {
    let one_tpc = InstanceConfig {
        g_units: 1,
        gpcs: 1,
        tpcs_per_gpc: 1,
    };
    let mut h = Hierarchy::new(HierarchyConfig::new(vec![one_tpc]))?;
    let who = RequestIdentity::new(0, 1);

    h.submit(0, who, 3 * PAGE, true)?;
    println!("cold miss: {} cycles", h.run_to_completion()[0].latency());
    h.submit(1_000, who, 3 * PAGE, true)?;
    println!("L1 hit:    {} cycles", h.run_to_completion()[0].latency());

    // Four requests to a new page while its walk is outstanding.
    for t in 2_000..2_004 {
        h.submit(t, who, 9 * PAGE, true)?;
    }
    for r in h.run_to_completion() {
        println!("issued {} done {} coalesced {}", r.issue_tick, r.completion_tick, r.coalesced);
    }
    println!("{:?}", h.totals());
    Ok(())
}
