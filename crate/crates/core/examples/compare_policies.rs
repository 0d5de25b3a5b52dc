//! Compares the two-base policy against the conventional L3 on the
//! contended two-tenant mix.

use star_tlb::experiment::{compare, run, ExperimentConfig};
use star_tlb::variants::PolicyKind;
use star_tlb::workloads::Mix;

fn main() -> star_tlb::Result<()> {
    let mix = Mix::contended_pair();
    let star = run(&ExperimentConfig::for_mix(&mix, PolicyKind::Star2, 42))?;
    let base = run(&ExperimentConfig::for_mix(&mix, PolicyKind::Baseline, 42))?;
    let c = compare(&star, &base, false)?;
    println!("{c}");
    print!("{}", c.to_csv_string()?);
    Ok(())
}
