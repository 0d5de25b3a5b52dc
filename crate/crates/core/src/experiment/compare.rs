use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::RunReport;
use crate::variants::PolicyKind;

/// Per-tenant difference between two reports, `a - b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PidDelta {
    pub pid: u32,
    pub l3_hit_rate_a: Option<f64>,
    pub l3_hit_rate_b: Option<f64>,
    pub l3_hit_rate_delta: Option<f64>,
    pub utilization_a: Option<f64>,
    pub utilization_b: Option<f64>,
    pub utilization_delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub policy_a: PolicyKind,
    pub policy_b: PolicyKind,
    pub seed_a: u64,
    pub seed_b: u64,
    pub rows: Vec<PidDelta>,
    /// Harmonic mean of per-tenant L3 hit rates.
    pub hmean_l3_hit_rate_a: Option<f64>,
    pub hmean_l3_hit_rate_b: Option<f64>,
    /// Harmonic mean of per-tenant `hit_rate_a / hit_rate_b`.
    pub hmean_l3_hit_ratio: Option<f64>,
}

fn diff(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    Some(a? - b?)
}

/// Harmonic mean of the defined values; zero if any value is zero.
pub fn harmonic_mean(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let mut n = 0usize;
    let mut inv = 0.0;
    for v in values {
        if v <= 0.0 {
            return Some(0.0);
        }
        n += 1;
        inv += 1.0 / v;
    }
    (n > 0).then(|| n as f64 / inv)
}

/// Tenant-by-tenant comparison of two runs over the same pids. Runs with
/// different seeds are refused unless `force` is set.
pub fn compare(a: &RunReport, b: &RunReport, force: bool) -> Result<Comparison> {
    let (mut pa, mut pb) = (a.pids(), b.pids());
    pa.sort_unstable();
    pb.sort_unstable();
    if pa != pb {
        return Err(Error::Compare(format!("pid sets differ: {pa:?} vs {pb:?}")));
    }
    if a.seed != b.seed && !force {
        return Err(Error::Compare(format!(
            "seeds differ ({} vs {}); pass --force to compare anyway",
            a.seed, b.seed
        )));
    }
    let rows: Vec<PidDelta> = pa
        .iter()
        .map(|&pid| {
            let (ta, tb) = (a.tenant(pid).expect("pid"), b.tenant(pid).expect("pid"));
            PidDelta {
                pid,
                l3_hit_rate_a: ta.l3.hit_rate,
                l3_hit_rate_b: tb.l3.hit_rate,
                l3_hit_rate_delta: diff(ta.l3.hit_rate, tb.l3.hit_rate),
                utilization_a: ta.utilization.average,
                utilization_b: tb.utilization.average,
                utilization_delta: diff(ta.utilization.average, tb.utilization.average),
            }
        })
        .collect();
    let ratios = rows.iter().filter_map(|r| match (r.l3_hit_rate_a, r.l3_hit_rate_b) {
        (Some(x), Some(y)) if y > 0.0 => Some(x / y),
        _ => None,
    });
    Ok(Comparison {
        policy_a: a.policy,
        policy_b: b.policy,
        seed_a: a.seed,
        seed_b: b.seed,
        hmean_l3_hit_rate_a: harmonic_mean(rows.iter().filter_map(|r| r.l3_hit_rate_a)),
        hmean_l3_hit_rate_b: harmonic_mean(rows.iter().filter_map(|r| r.l3_hit_rate_b)),
        hmean_l3_hit_ratio: harmonic_mean(ratios),
        rows,
    })
}

impl Comparison {
    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        w.write_record([
            "pid",
            "l3_hit_rate_a",
            "l3_hit_rate_b",
            "l3_hit_rate_delta",
            "utilization_a",
            "utilization_b",
            "utilization_delta",
        ])?;
        for r in &self.rows {
            w.write_record([
                r.pid.to_string(),
                cell(r.l3_hit_rate_a),
                cell(r.l3_hit_rate_b),
                cell(r.l3_hit_rate_delta),
                cell(r.utilization_a),
                cell(r.utilization_b),
                cell(r.utilization_delta),
            ])?;
        }
        w.write_record([
            "hmean".to_string(),
            cell(self.hmean_l3_hit_rate_a),
            cell(self.hmean_l3_hit_rate_b),
            cell(diff(self.hmean_l3_hit_rate_a, self.hmean_l3_hit_rate_b)),
            String::new(),
            String::new(),
            String::new(),
        ])?;
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

impl fmt::Display for Comparison {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pct = |v: Option<f64>| match v {
            Some(x) => format!("{:>8.2}", 100.0 * x),
            None => format!("{:>8}", "-"),
        };
        writeln!(f, "a = {} (seed {}), b = {} (seed {})", self.policy_a, self.seed_a, self.policy_b, self.seed_b)?;
        writeln!(f, "{:>8} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8}", "pid", "l3% a", "l3% b", "delta", "util% a", "util% b", "delta")?;
        for r in &self.rows {
            writeln!(
                f,
                "{:>8} {} {} {} {} {} {}",
                r.pid,
                pct(r.l3_hit_rate_a),
                pct(r.l3_hit_rate_b),
                pct(r.l3_hit_rate_delta),
                pct(r.utilization_a),
                pct(r.utilization_b),
                pct(r.utilization_delta)
            )?;
        }
        write!(
            f,
            "{:>8} {} {}   ratio {}",
            "hmean",
            pct(self.hmean_l3_hit_rate_a),
            pct(self.hmean_l3_hit_rate_b),
            self.hmean_l3_hit_ratio.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into())
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_means() {
        assert_eq!(harmonic_mean([1.0, 1.0]), Some(1.0));
        assert!((harmonic_mean([1.0, 0.5]).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(harmonic_mean([0.0, 1.0]), Some(0.0));
        assert_eq!(harmonic_mean(std::iter::empty()), None);
    }
}
