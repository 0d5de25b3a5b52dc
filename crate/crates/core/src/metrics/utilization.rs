use serde::{Deserialize, Serialize};

use crate::addr::Tick;

/// Sub-entry occupancy of an entry (or of one base of a shared entry) at the
/// moment it was evicted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvictionSample {
    pub pid: u32,
    pub utilized: u32,
    /// 16 for a whole exclusive entry, the per-base share for a shared one.
    pub capacity: u32,
    pub shared: bool,
    pub tick: Tick,
}

impl EvictionSample {
    pub fn fraction(&self) -> f64 {
        self.utilized as f64 / self.capacity as f64
    }
}

/// Resolution of utilization CDFs: one bucket per sixteenth.
pub const CDF_STEPS: u32 = 16;

/// Eviction-time utilization distribution.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct UtilizationStats {
    pub evictions: u64,
    /// `histogram[k]` counts samples with utilization `k / 16`.
    pub histogram: Vec<u64>,
    /// Cumulative fraction of samples at or below `k / 16`.
    pub cdf: Vec<f64>,
    /// Mean utilization fraction; absent without samples.
    pub average: Option<f64>,
}

fn bucket(s: &EvictionSample) -> usize {
    (s.utilized as u64 * CDF_STEPS as u64 / s.capacity as u64) as usize
}

/// Histogram, CDF and mean of the utilization fraction over `samples`.
///
/// The mean is the occurrence-weighted sum of fractions over the number of
/// evictions.
pub fn utilization_stats<'a, I>(samples: I) -> UtilizationStats
where
    I: IntoIterator<Item = &'a EvictionSample>,
{
    let mut histogram = vec![0u64; CDF_STEPS as usize + 1];
    let mut sum = 0.0;
    let mut n = 0u64;
    for s in samples {
        histogram[bucket(s)] += 1;
        sum += s.fraction();
        n += 1;
    }
    let cdf = if n == 0 {
        vec![0.0; histogram.len()]
    } else {
        let mut acc = 0u64;
        histogram
            .iter()
            .map(|&c| {
                acc += c;
                acc as f64 / n as f64
            })
            .collect()
    };
    UtilizationStats {
        evictions: n,
        histogram,
        cdf,
        average: (n > 0).then(|| sum / n as f64),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(utilized: u32, capacity: u32) -> EvictionSample {
        EvictionSample {
            pid: 1,
            utilized,
            capacity,
            shared: false,
            tick: 0,
        }
    }

    #[test]
    fn all_full() {
        let st = utilization_stats(&[s(16, 16), s(16, 16)]);
        assert_eq!(st.average, Some(1.0));
        assert_eq!(st.cdf[15], 0.0);
        assert_eq!(st.cdf[16], 1.0);
    }

    #[test]
    fn quarter_and_three_quarters() {
        let st = utilization_stats(&[s(4, 16), s(12, 16)]);
        assert_eq!(st.average, Some(0.5));
    }

    #[test]
    fn weighted_mean() {
        let samples = [s(1, 16), s(1, 16), s(1, 16), s(16, 16)];
        let st = utilization_stats(&samples);
        assert_eq!(st.average, Some(0.296875));
        assert_eq!(st.histogram[1], 3);
        assert_eq!(st.cdf[1], 0.75);
    }

    #[test]
    fn empty_has_no_average() {
        let st = utilization_stats(&[]);
        assert_eq!(st.average, None);
        assert_eq!(st.evictions, 0);
    }

    #[test]
    fn shared_samples_land_on_sixteenths() {
        let st = utilization_stats(&[s(3, 8), s(1, 4)]);
        assert_eq!(st.histogram[6], 1);
        assert_eq!(st.histogram[4], 1);
    }
}
