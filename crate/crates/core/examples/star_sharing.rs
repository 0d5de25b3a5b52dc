//! Two processes with sparse regions share entries of a one-set, two-way
//! TLB that a conventional design would thrash.

use star_tlb::addr::{PageConfig, RequestIdentity, TlbGeometry};
use star_tlb::tlb::{StarConfig, StarTlb, SubEntryTlb, TranslationBuffer};

const PAGE: u64 = 64 * 1024;

fn drive(tlb: &mut dyn TranslationBuffer) -> u64 {
    let mut hits = 0;
    for round in 0..50 {
        for pid in 0..4u32 {
            let who = RequestIdentity::new(pid as u16, pid);
            // Every process keeps two pages of one region hot.
            let va = ((pid as u64) << 40) | ((round % 2) * PAGE);
            if tlb.lookup(va, who, round).kind.is_hit() {
                hits += 1;
            } else {
                tlb.insert(va, va >> 16, who, round);
            }
        }
    }
    hits
}

fn main() {
    let geom = TlbGeometry::new(1, 2, 16, 40);
    let page = PageConfig::default();
    let mut base = SubEntryTlb::new(geom, page);
    let mut star = StarTlb::new(geom, page, StarConfig::two_base());
    println!("conventional hits: {}", drive(&mut base));
    println!("two-base hits:     {}", drive(&mut star));
    for way in 0..2 {
        let e = star.entry(0, way);
        let pids: Vec<u32> = e.bases.iter().filter(|b| b.valid).map(|b| b.owner_pid).collect();
        println!("way {way}: layout {:?}, bases of pids {pids:?}", e.layout);
    }
    println!("{:?}", star.counters());
}
