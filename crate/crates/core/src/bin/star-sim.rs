use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use star_tlb::experiment::{compare, run, write_outputs, ExperimentConfig};
use star_tlb::metrics::RunReport;
use star_tlb::variants::PolicyKind;
use star_tlb::workloads::{write_trace, Mix};
use star_tlb::Result;

#[derive(Parser)]
#[command(name = "star-sim", version, about = "Shared L3 TLB simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(clap::Args)]
struct Source {
    /// Experiment configuration (TOML).
    #[arg(long, conflicts_with = "mix")]
    config: Option<PathBuf>,
    /// Built-in desk-scale mix: w1..w9, pair or hml.
    #[arg(long)]
    mix: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Override the L3 policy.
    #[arg(long)]
    policy: Option<PolicyKind>,
}

impl Source {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = match (&self.config, &self.mix) {
            (Some(path), _) => ExperimentConfig::load(path)?,
            (None, Some(name)) => {
                let mix = Mix::by_name(name).ok_or_else(|| {
                    star_tlb::Error::Config(format!("unknown mix `{name}`"))
                })?;
                ExperimentConfig::for_mix(&mix, PolicyKind::Baseline, 42)
            }
            (None, None) => {
                return Err(star_tlb::Error::Config(
                    "pass --config FILE or --mix NAME".into(),
                ))
            }
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(p) = self.policy {
            cfg.policy = p;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one configuration and write report.json, report.csv and config.toml.
    Run {
        #[command(flatten)]
        source: Source,
        /// Output directory; defaults to `output.dir` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the tenant traces of a configuration to a trace file (`.gz` compresses).
    GenTrace {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print a saved report.
    Report {
        report: PathBuf,
        /// Print the long-format CSV instead of a summary table.
        #[arg(long)]
        csv: bool,
    },
    /// Per-tenant deltas of report A minus report B.
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// Compare runs made with different seeds.
        #[arg(long)]
        force: bool,
        /// Also write the delta table as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn summary(r: &RunReport) -> String {
    let pct = |v: Option<f64>| v.map(|x| format!("{:.2}", 100.0 * x)).unwrap_or_else(|| "-".into());
    let mut s = format!(
        "policy {} seed {} ({} bits/entry, {} L3 sub-entries)\n{:>8} {:>5} {:>9} {:>7} {:>7} {:>7} {:>8} {:>9} {:>7}\n",
        r.policy, r.seed, r.bits_per_entry, r.l3_subentries,
        "pid", "class", "requests", "l1%", "l2%", "l3%", "walks", "lat mean", "util%"
    );
    for t in &r.tenants {
        s += &format!(
            "{:>8} {:>5} {:>9} {:>7} {:>7} {:>7} {:>8} {:>9.1} {:>7}\n",
            t.pid,
            t.class.map(|c| format!("{c:?}")).unwrap_or_else(|| "-".into()),
            t.requests,
            pct(t.l1.hit_rate),
            pct(t.l2.hit_rate),
            pct(t.l3.hit_rate),
            t.walks,
            t.latency.mean,
            pct(t.utilization.average),
        );
    }
    let a = &r.aggregate;
    s += &format!(
        "{:>8} {:>5} {:>9} {:>7} {:>7} {:>7} {:>8} {:>9.1} {:>7}",
        "all", "", a.requests, pct(a.l1.hit_rate), pct(a.l2.hit_rate), pct(a.l3.hit_rate),
        a.walks, a.latency.mean, pct(a.utilization.average)
    );
    s
}

fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Run { source, out } => {
            let cfg = source.load()?;
            let report = run(&cfg)?;
            match out.or_else(|| cfg.output.dir.clone()) {
                Some(dir) => {
                    write_outputs(&report, &cfg, &dir)?;
                    println!("{}", summary(&report));
                    println!("wrote {}", dir.display());
                }
                None => print!("{}", report.to_csv_string()?),
            }
        }
        Command::GenTrace { source, out } => {
            let cfg = source.load()?;
            let records: Vec<_> = cfg.tenant_traces()?.into_iter().flatten().collect();
            write_trace(&out, &records)?;
            println!("wrote {} records to {}", records.len(), out.display());
        }
        Command::Report { report, csv } => {
            let r = RunReport::read_json(&report)?;
            if csv {
                print!("{}", r.to_csv_string()?);
            } else {
                println!("{}", summary(&r));
            }
        }
        Command::Compare { a, b, force, out } => {
            let c = compare(&RunReport::read_json(&a)?, &RunReport::read_json(&b)?, force)?;
            println!("{c}");
            if let Some(path) = out {
                std::fs::write(Path::new(&path), c.to_csv_string()?)?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse().cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
