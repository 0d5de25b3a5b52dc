//! Splits a few virtual addresses into VPB, set index, sub-entry index and
//! offset for the default L3 (128 sets, 16 pages of 64 KB per entry).

use star_tlb::addr::{decompose, recompose, PageConfig, TlbGeometry};

fn main() -> star_tlb::Result<()> {
    let page = PageConfig::default();
    let l3 = TlbGeometry::default_l3();
    println!("{:>18} {:>10} {:>4} {:>4} {:>8}", "vaddr", "vpb", "set", "sub", "offset");
    for vaddr in [0x0, 0x1234_5678, 0x7f00_0010_0000, (7u64 << 40) | 0x3_0000] {
        let d = decompose(vaddr, page, &l3);
        assert_eq!(recompose(&d, page, &l3)?, vaddr);
        println!(
            "{vaddr:>#18x} {:>#10x} {:>4} {:>4} {:>#8x}",
            d.vpb, d.set_index, d.sub_index, d.offset
        );
    }
    Ok(())
}
