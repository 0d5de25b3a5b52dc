//! Generates traces for two tenants, interleaves them, and writes and reads
//! back a compressed trace file.

use star_tlb::addr::PageConfig;
use star_tlb::workloads::{
    generate, generate_pages, interleave, read_trace, write_trace, PatternKind, PatternSpec,
    TenantSpec,
};

fn main() -> star_tlb::Result<()> {
    for kind in [
        PatternKind::Stream,
        PatternKind::Stride(4),
        PatternKind::Block { block_pages: 4, blocks: 4 },
        PatternKind::Dependent,
    ] {
        let pages = generate_pages(&PatternSpec::new(kind, 16, 20), 1)?;
        println!("{kind:?}: {pages:?}");
    }

    let page = PageConfig::default();
    let a = TenantSpec::new(1, 2, PatternSpec::new(PatternKind::Stream, 64, 6));
    let b = TenantSpec::new(2, 1, PatternSpec::new(PatternKind::Dependent, 64, 3));
    let traces = vec![generate(&a, 0, page, 7)?, generate(&b, 1, page, 7)?];
    let mixed = interleave(&traces, &[2, 1])?;
    for r in &mixed {
        println!("tick {} pid {} vaddr {:#x}", r.tick, r.pid, r.vaddr);
    }

    let dir = std::env::temp_dir().join("star-tlb-example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("mixed.trace.gz");
    write_trace(&path, &mixed)?;
    assert_eq!(read_trace(&path)?, mixed);
    println!("round-tripped {} records through {}", mixed.len(), path.display());
    Ok(())
}
