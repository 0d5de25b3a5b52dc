//! Reuse distance of two access streams: a cyclic sweep has a single step in
//! its CDF, a random stream spreads out.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use star_tlb::metrics::{reuse_distance_stream, ReuseHistogram};

fn cdf_of(stream: &[(u32, u64)]) -> ReuseHistogram {
    let mut h = ReuseHistogram::default();
    for e in reuse_distance_stream(stream) {
        h.record(e.distance);
    }
    h
}

fn main() {
    let cyclic: Vec<(u32, u64)> = (0..400).map(|i| (0, i % 100)).collect();
    println!("cyclic 100 pages: {:?}", cdf_of(&cyclic).cdf());

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let random: Vec<(u32, u64)> = (0..5000).map(|_| (0, rng.gen_range(0..100))).collect();
    let h = cdf_of(&random);
    for cap in [16, 32, 64, 100] {
        println!("random: {:.3} of reuses below {cap}", h.fraction_below(cap).unwrap());
    }
}
