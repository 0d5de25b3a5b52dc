//! Builds an experiment from TOML, runs it and writes report.json,
//! report.csv and config.toml into a temporary directory.

use star_tlb::experiment::{run, write_outputs, ExperimentConfig};

const CONFIG: &str = r#"
seed = 7
policy = "star2"
issue_interval = 64

[geometry.l2]
sets = 2
ways = 4
subentries_per_entry = 16
lookup_latency_cycles = 10

[geometry.l3]
sets = 8
ways = 8
subentries_per_entry = 16
lookup_latency_cycles = 40

[[tenants]]
pid = 1
g_units = 4
gpcs = 1
tpcs_per_gpc = 1
pattern = { kind = { stride = 16 }, footprint_pages = 96, accesses = 8000 }

[[tenants]]
pid = 2
g_units = 3
gpcs = 1
tpcs_per_gpc = 1
pattern = { kind = "stream", footprint_pages = 1536, accesses = 8000 }
"#;

fn main() -> star_tlb::Result<()> {
    let cfg = ExperimentConfig::from_toml_str(CONFIG)?;
    let report = run(&cfg)?;
    for t in &report.tenants {
        println!(
            "pid {}: {} requests, L3 hit {:?}, {} walks, mean latency {:.1}",
            t.pid, t.requests, t.l3.hit_rate, t.walks, t.latency.mean
        );
    }
    let dir = std::env::temp_dir().join("star-tlb-run");
    write_outputs(&report, &cfg, &dir)?;
    println!("wrote {}", dir.display());
    Ok(())
}
