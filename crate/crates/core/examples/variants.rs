//! Geometry, entry size and static way split of every L3 policy.

use star_tlb::addr::TlbGeometry;
use star_tlb::metrics::bits_per_entry;
use star_tlb::variants::{make_geometry, static_partition_map, PolicyKind};

fn main() -> star_tlb::Result<()> {
    println!("{:<26} {:>5} {:>5} {:>4} {:>8} {:>6}", "policy", "sets", "ways", "sub", "capacity", "bits");
    for kind in PolicyKind::ALL {
        let (g, probe) = make_geometry(kind, TlbGeometry::default_l3())?;
        println!(
            "{:<26} {:>5} {:>5} {:>4} {:>8} {:>6}  {probe:?}",
            kind.name(),
            g.sets,
            g.ways,
            g.subentries_per_entry,
            g.total_subentries(),
            bits_per_entry(kind)
        );
    }
    for sizes in [[3, 2, 2], [4, 2, 1], [1, 1, 1]] {
        println!("instances {sizes:?} -> ways {:?}", static_partition_map(&sizes, 8)?);
    }
    Ok(())
}
