//! Runs every desk-scale mix under several L3 policies and prints the L3 hit
//! rate and eviction-time utilization of each tenant.
//!
//! ```text
//! cargo run --release --example policy_sweep [mix ...]
//! ```

use star_tlb::experiment::{run_many, ExperimentConfig};
use star_tlb::variants::PolicyKind;
use star_tlb::workloads::{suite, Mix};

fn main() -> star_tlb::Result<()> {
    let names: Vec<String> = std::env::args().skip(1).collect();
    let mut mixes = suite();
    mixes.extend([Mix::contended_pair(), Mix::hml()]);
    if !names.is_empty() {
        mixes.retain(|m| names.iter().any(|n| n == m.name));
    }
    let policies = [
        PolicyKind::Baseline,
        PolicyKind::Star2,
        PolicyKind::Star4,
        PolicyKind::StaticPartition,
        PolicyKind::Star2Static,
    ];
    let cfgs: Vec<_> = mixes
        .iter()
        .flat_map(|m| policies.map(|p| ExperimentConfig::for_mix(m, p, 42)))
        .collect();
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    let reports = run_many(&cfgs, threads)?;
    let pct = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{:.1}", 100.0 * x));
    for (m, chunk) in mixes.iter().zip(reports.chunks(policies.len())) {
        println!("{} ({})", m.name, m.category);
        for (p, r) in policies.iter().zip(chunk) {
            let r = r.as_ref().map_err(|e| star_tlb::Error::Config(e.to_string()))?;
            let cells: Vec<String> = r
                .tenants
                .iter()
                .map(|t| {
                    format!(
                        "{}:{:?} l3 {:>5} util {:>5} mpki {:>6}",
                        t.pid,
                        t.class.unwrap_or(star_tlb::metrics::MpkiClass::L),
                        pct(t.l3.hit_rate),
                        pct(t.utilization.average),
                        t.l2_mpki.map_or("-".into(), |x| format!("{x:.1}"))
                    )
                })
                .collect();
            println!(
                "  {:<16} all l3 {:>5} util {:>5} | {}",
                p.name(),
                pct(r.aggregate.l3.hit_rate),
                pct(r.aggregate.utilization.average),
                cells.join(" | ")
            );
        }
    }
    Ok(())
}
