//! Acceptance checks. Prints one PASS or FAIL line per criterion and exits
//! nonzero if any fails.

mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use star_tlb::addr::{PageConfig, RequestIdentity, TlbGeometry};
use star_tlb::experiment::{run, run_many, ExperimentConfig, GeometryConfig, SCALED_ISSUE_INTERVAL};
use star_tlb::hierarchy::{Hierarchy, HierarchyConfig, InstanceConfig};
use star_tlb::metrics::{bits_per_entry, reuse_distance_stream, ReuseHistogram, RunReport, CDF_STEPS};
use star_tlb::tlb::layout::{local_of, owner_of, slot_map_degree};
use star_tlb::tlb::{reconstruct_index, LayoutMode, StarConfig, StarTlb, SubEntryTlb, TranslationBuffer};
use star_tlb::variants::{make_geometry, static_partition_map, PolicyKind};
use star_tlb::workloads::{suite, Mix, PatternKind, PatternSpec, TenantSpec};

type Check = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn all_mixes() -> Vec<Mix> {
    let mut m = suite();
    m.push(Mix::contended_pair());
    m.push(Mix::hml());
    m
}

fn reports(mixes: &[Mix], policy: PolicyKind) -> Vec<RunReport> {
    let cfgs: Vec<_> = mixes
        .iter()
        .map(|m| ExperimentConfig::for_mix(m, policy, 42))
        .collect();
    run_many(&cfgs, 4)
        .expect("thread pool")
        .into_iter()
        .map(|r| r.expect("run succeeds"))
        .collect()
}

fn pct(v: Option<f64>) -> String {
    v.map(|x| format!("{:.2}%", 100.0 * x)).unwrap_or_else(|| "n/a".into())
}

fn l3(r: &RunReport) -> f64 {
    r.aggregate.l3.hit_rate.unwrap_or(0.0)
}

/// Feed every request of `cfg`'s schedule straight into two L3 models and
/// report the first access where they disagree on anything observable.
fn lockstep(cfg: &ExperimentConfig, mut a: Box<dyn TranslationBuffer>, mut b: Box<dyn TranslationBuffer>) -> Option<String> {
    for (i, s) in cfg.schedule().unwrap().iter().enumerate() {
        let r = s.record;
        let who = RequestIdentity::new(r.instance_id, r.pid);
        let t = r.tick;
        let (x, y) = (a.lookup(r.vaddr, who, t), b.lookup(r.vaddr, who, t));
        if x != y {
            return Some(format!("request {i}: lookup {x:?} vs {y:?}"));
        }
        if !x.kind.is_hit() {
            let pfn = r.vaddr >> 16;
            let (x, y) = (a.insert(r.vaddr, pfn, who, t), b.insert(r.vaddr, pfn, who, t));
            if x != y {
                return Some(format!("request {i}: insert {x:?} vs {y:?}"));
            }
        }
        let (x, y) = (a.take_evictions(), b.take_evictions());
        if x != y {
            return Some(format!("request {i}: evictions {x:?} vs {y:?}"));
        }
    }
    (a.counters() != b.counters()).then(|| "counters differ".into())
}

fn c1() -> Check {
    let (b, s) = (bits_per_entry(PolicyKind::Baseline), bits_per_entry(PolicyKind::Star2));
    ensure(b == 864 && s == 914, format!("baseline {b} bits, two-base {s} bits"))
}

fn c2() -> Check {
    let kinds = [
        PolicyKind::Baseline,
        PolicyKind::HalfSubDoubleSet,
        PolicyKind::HalfSubDoubleWaySeq,
        PolicyKind::HalfSubDoubleWayPara,
    ];
    let sizes: Vec<u64> = kinds
        .iter()
        .map(|&k| make_geometry(k, TlbGeometry::default_l3()).unwrap().0.total_subentries())
        .collect();
    ensure(sizes.iter().all(|&s| s == 16_384), format!("sub-entries {sizes:?}"))
}

fn c3() -> Check {
    let a = common::compare_with_oracle(100_000, 2024, true);
    ensure(
        a.mismatches == 0 && a.shares > 0 && a.reverts > 0,
        format!(
            "{} accesses, {} mismatches ({} shares, {} reverts, {} conflicts){}",
            a.accesses,
            a.mismatches,
            a.shares,
            a.reverts,
            a.conflicts,
            a.first_mismatch.map(|m| format!(": {m}")).unwrap_or_default()
        ),
    )
}

fn c4() -> Check {
    let page = PageConfig::default();
    let mut n = 0;
    for mix in all_mixes() {
        let cfg = ExperimentConfig::for_mix(&mix, PolicyKind::Baseline, 42);
        for geom in [GeometryConfig::scaled().l3, TlbGeometry::default_l3()] {
            let base = Box::new(SubEntryTlb::new(geom, page));
            let star = Box::new(StarTlb::new(geom, page, StarConfig::default()));
            if let Some(m) = lockstep(&cfg, base, star) {
                return Err(format!("{} on {}x{}: {m}", mix.name, geom.sets, geom.ways));
            }
            n += 1;
        }
    }
    Ok(format!("{n} trace/geometry pairs identical"))
}

fn c5() -> Check {
    let mut checked = 0;
    for layout in [LayoutMode::Sequential, LayoutMode::Stride] {
        for degree in [2, 4] {
            let mut owner = [usize::MAX; 16];
            for ord in 0..degree {
                for sub in 0..16u32 {
                    let (phys, aib) = slot_map_degree(layout, degree, ord, sub);
                    let back = reconstruct_index(layout, degree, local_of(layout, degree, phys), aib);
                    if back != sub || owner_of(layout, degree, phys) != ord {
                        return Err(format!("{layout:?} degree {degree} base {ord} sub {sub}"));
                    }
                    if owner[phys] != usize::MAX && owner[phys] != ord {
                        return Err(format!("slot {phys} shared by bases {} and {ord}", owner[phys]));
                    }
                    owner[phys] = ord;
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{checked} (layout, degree, base, sub) cases"))
}

fn single_tenant(kind: PatternKind, footprint: u64, accesses: u64) -> ExperimentConfig {
    let t = TenantSpec::new(1, 1, PatternSpec::new(kind, footprint, accesses)).with_cores(1, 1);
    ExperimentConfig {
        issue_interval: SCALED_ISSUE_INTERVAL,
        geometry: GeometryConfig::scaled(),
        ..ExperimentConfig::new(vec![t])
    }
}

fn c6() -> Check {
    let reach = GeometryConfig::scaled().l3.total_subentries();
    let f = 4 * reach;
    let full = CDF_STEPS as usize;
    let mut details = Vec::new();
    let mut ok = true;
    for (kind, bucket) in [(PatternKind::Stream, full), (PatternKind::Stride(16), 1)] {
        let r = run(&single_tenant(kind, f, 3 * f)).unwrap();
        let u = &r.tenants[0].utilization;
        let at = u.histogram[bucket];
        ok &= u.evictions > 0 && at == u.evictions;
        details.push(format!("{kind:?}: {at}/{} samples at {bucket}/16", u.evictions));
    }
    ensure(ok, details.join(", "))
}

fn c7(base: &[RunReport], star: &[RunReport]) -> Check {
    let (b, s) = (&base[0], &star[0]);
    let ub = b.aggregate.utilization.average.unwrap_or(0.0);
    let us = s.aggregate.utilization.average.unwrap_or(0.0);
    ensure(
        l3(s) > l3(b) && us - ub >= 0.10,
        format!(
            "L3 hit {} -> {}, eviction utilization {} -> {}",
            pct(Some(l3(b))),
            pct(Some(l3(s))),
            pct(Some(ub)),
            pct(Some(us))
        ),
    )
}

fn c8(mixes: &[Mix], base: &[RunReport], star: &[RunReport]) -> Check {
    let mut worst = (f64::INFINITY, String::new());
    for ((m, b), s) in mixes.iter().zip(base).zip(star) {
        for tb in &b.tenants {
            let ts = s.tenant(tb.pid).unwrap();
            if let (Some(hb), Some(hs)) = (tb.l3.hit_rate, ts.l3.hit_rate) {
                if hs - hb < worst.0 {
                    worst = (hs - hb, format!("{} pid {}", m.name, tb.pid));
                }
            } else if tb.l3.hit_rate.is_some() != ts.l3.hit_rate.is_some() {
                return Err(format!("{} pid {}: L3 probed under one policy only", m.name, tb.pid));
            }
        }
    }
    ensure(
        worst.0 >= -0.01,
        format!("{} mixes, worst per-tenant change {:+.2}pp ({})", mixes.len(), 100.0 * worst.0, worst.1),
    )
}

fn c9() -> Check {
    let mix = Mix::hml();
    let split = static_partition_map(&mix.tenants.iter().map(|t| t.g_units).collect::<Vec<_>>(), 8).unwrap();
    let policies = [PolicyKind::Baseline, PolicyKind::StaticPartition, PolicyKind::Star2Static];
    let cfgs: Vec<_> = policies.iter().map(|&p| ExperimentConfig::for_mix(&mix, p, 42)).collect();
    let rs: Vec<RunReport> = run_many(&cfgs, 3).unwrap().into_iter().map(|r| r.unwrap()).collect();
    let h = mix.tenants[0].pid;
    let hit = |r: &RunReport| r.tenant(h).unwrap().l3.hit_rate.unwrap_or(0.0);
    let (shared, stat, star) = (hit(&rs[0]), hit(&rs[1]), hit(&rs[2]));
    ensure(
        split == vec![4, 2, 2] && stat < shared && star > stat,
        format!(
            "ways {split:?}; H tenant L3 hit shared {}, static {}, two-base static {}",
            pct(Some(shared)),
            pct(Some(stat)),
            pct(Some(star))
        ),
    )
}

fn c10(mixes: &[Mix], base: &[RunReport], star: &[RunReport]) -> Check {
    let page = PageConfig::default();
    let no_tier = StarConfig {
        four_way: false,
        ..StarConfig::four_base()
    };
    for mix in mixes {
        let cfg = ExperimentConfig::for_mix(mix, PolicyKind::Star4, 42);
        let geom = cfg.geometry.l3;
        let a = Box::new(StarTlb::new(geom, page, no_tier.clone()));
        let b = Box::new(StarTlb::new(geom, page, StarConfig::two_base()));
        if let Some(m) = lockstep(&cfg, a, b) {
            return Err(format!("tier-4 disabled differs from two-base on {}: {m}", mix.name));
        }
    }
    let four = reports(mixes, PolicyKind::Star4);
    let mut promotions = 0;
    for (((m, b), s), f) in mixes.iter().zip(base).zip(star).zip(&four) {
        let (hb, hs, hf) = (l3(b), l3(s), l3(f));
        let between = hb.min(hs) <= hf && hf <= hb.max(hs);
        promotions += f.l3_counters.promotions;
        if !(between || hf >= hb) {
            return Err(format!(
                "{}: four-base {} outside baseline {} / two-base {}",
                m.name,
                pct(Some(hf)),
                pct(Some(hb)),
                pct(Some(hs))
            ));
        }
    }
    let p = mixes.iter().position(|m| m.name == "pair").unwrap();
    Ok(format!(
        "disabled tier equals two-base on {} mixes; pair L3 hit baseline {} two-base {} four-base {} ({promotions} promotions overall)",
        mixes.len(),
        pct(Some(l3(&base[p]))),
        pct(Some(l3(&star[p]))),
        pct(Some(l3(&four[p])))
    ))
}

fn c11() -> Check {
    let p = 300u64;
    let stream: Vec<(u32, u64)> = (0..5 * p).map(|i| (1, i % p)).collect();
    let mut h = ReuseHistogram::default();
    reuse_distance_stream(&stream).iter().for_each(|e| h.record(e.distance));
    let pure = h.cdf();

    let r = run(&single_tenant(PatternKind::Stream, p, 5 * p)).unwrap();
    let sim = r.tenants[0].reuse.cdf.clone();

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut mismatched = 0;
    for round in 0..3 {
        let keys = [50, 500, 5000][round];
        let s: Vec<(u32, u64)> = (0..10_000)
            .map(|_| (rng.gen_range(0..2), rng.gen_range(0..keys)))
            .collect();
        let fast: Vec<u64> = reuse_distance_stream(&s).iter().map(|e| e.distance).collect();
        let slow: Vec<u64> = common::brute_reuse(&s).into_iter().flatten().collect();
        mismatched += (fast != slow) as u32;
    }
    let step = vec![(p - 1, 1.0)];
    ensure(
        pure == step && sim == step && mismatched == 0,
        format!("cyclic {p}-page CDF {pure:?}, simulated L3 stream {sim:?}, brute-force mismatching streams {mismatched}"),
    )
}

fn c12(all: &[RunReport]) -> Check {
    let mut h = Hierarchy::new(HierarchyConfig::new(vec![InstanceConfig::with_g_units(1)])).unwrap();
    h.submit(0, RequestIdentity::new(0, 1), 0x40_0000, true).unwrap();
    let cold = h.run_to_completion()[0].latency();
    let mut bad = Vec::new();
    for r in all {
        let t = r.totals;
        if t.walks_started != t.l3_misses || t.walks_completed != t.walks_started {
            bad.push(format!("{}: totals {t:?}", r.policy));
        }
        for tr in &r.tenants {
            if tr.walks != tr.l3.misses() {
                bad.push(format!("{} pid {}", r.policy, tr.pid));
            }
        }
    }
    ensure(
        cold == 451 && bad.is_empty(),
        format!("cold request {cold} cycles; {} runs checked, violations {bad:?}", all.len()),
    )
}

fn c13() -> Check {
    let cfgs: Vec<_> = [Mix::contended_pair(), Mix::hml(), suite().remove(0)]
        .iter()
        .flat_map(|m| {
            [PolicyKind::Baseline, PolicyKind::Star2, PolicyKind::Star4]
                .map(|p| ExperimentConfig::for_mix(m, p, 42))
        })
        .collect();
    let render = |threads| -> Vec<(String, String)> {
        run_many(&cfgs, threads)
            .unwrap()
            .into_iter()
            .map(|r| {
                let r = r.unwrap();
                (r.to_json_string().unwrap(), r.to_csv_string().unwrap())
            })
            .collect()
    };
    let (a, b, c) = (render(1), render(1), render(4));
    ensure(
        a == b && a == c,
        format!("{} runs byte-identical across repeats and 1 vs 4 threads", cfgs.len()),
    )
}

fn main() {
    let mixes = all_mixes();
    let base = reports(&mixes, PolicyKind::Baseline);
    let star = reports(&mixes, PolicyKind::Star2);
    let pair = mixes.iter().position(|m| m.name == "pair").unwrap();
    let all: Vec<RunReport> = base.iter().chain(&star).cloned().collect();

    let results: Vec<(u32, &str, Check)> = vec![
        (1, "entry bit counts", c1()),
        (2, "L3 capacity of every geometry", c2()),
        (3, "reference model agreement", c3()),
        (4, "sharing disabled equals conventional", c4()),
        (5, "slot map round trip", c5()),
        (6, "utilization signatures", c6()),
        (7, "contended pair gains", c7(&base[pair..=pair], &star[pair..=pair])),
        (8, "no tenant degrades", c8(&mixes, &base, &star)),
        (9, "static partitioning", c9()),
        (10, "four-base tier", c10(&mixes, &base, &star)),
        (11, "reuse distance", c11()),
        (12, "walk accounting and cold latency", c12(&all)),
        (13, "determinism", c13()),
    ];
    let mut failed = 0;
    for (n, name, r) in &results {
        match r {
            Ok(d) => println!("PASS criterion {n}: {name}: {d}"),
            Err(d) => {
                failed += 1;
                println!("FAIL criterion {n}: {name}: {d}");
            }
        }
    }
    println!("{} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
