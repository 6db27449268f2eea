//! The validation suite: twelve checks tying the analytic model, the
//! optimizer and the packet-level simulator together. Each criterion
//! prints one pass/fail line; `run_criterion` returns the full detail.
//!
//! Tolerances are fixed here, not tuned at run time. Two checks measure a
//! closed-form approximation against tight statistical bands and are
//! expected to expose its bias honestly rather than pass by construction;
//! their detail lines carry the per-point deviations.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::time::Instant;

use lir_core::analytics::{
    elr_bits_per_id, expected_wrong_hops, min_m_for_fpr, total_overhead_bits, OverheadCurve,
    OverheadParams,
};
use lir_core::bloom::{fpr, BloomFilter, LinkId};
use lir_core::encoding::{evaluate, solve_dp, EncodingPolicy};
use lir_core::multicast::{
    choose_primary, link_identified_walk, node_identified_walk, pnb_tree, spf_tree, tree_nodes,
};
use lir_core::rng::{mix, Rng};
use lir_core::scenario::{BfLength, Management, Mode, Scenario};
use lir_core::sim::SimContext;
use lir_core::Constellation;
use lir_oracles::branching::branching_mc;
use lir_oracles::policy::{min_policy_cost, policy_cost};
use lir_oracles::scan::m_scan;

pub struct CriterionResult {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: Vec<String>,
    pub seconds: f64,
}

pub const CRITERIA: [(u32, &str); 12] = [
    (1, "false-positive formula vs empirical rate"),
    (2, "wrong-hop expectation vs branching Monte-Carlo"),
    (3, "wrong-hop expectation vs packet-level topology"),
    (4, "optimal-length overhead curve is convexly increasing"),
    (5, "segment optimizer equals exhaustive enumeration"),
    (6, "optimal policy dominates source encoding, growing gap"),
    (
        7,
        "multi-flow queuing: optimal vs source over filter lengths",
    ),
    (8, "failure management ordering (lsa / odr / odd / ospf)"),
    (9, "explicit-list baseline comparison at target rates"),
    (10, "multicast trees and one-to-many ordering"),
    (11, "node-identified duplication and loops"),
    (12, "byte-identical reruns"),
];

pub fn run_criterion(id: u32) -> CriterionResult {
    let start = Instant::now();
    let (passed, detail) = match id {
        1 => c1_fpr_grid(),
        2 => c2_branching(),
        3 => c3_topology_wrong_hops(),
        4 => c4_curve_shape(),
        5 => c5_dp_vs_enumeration(),
        6 => c6_single_flow_gap(),
        7 => c7_multiflow_queuing(),
        8 => c8_failure_ordering(),
        9 => c9_elr_comparison(),
        10 => c10_multicast(),
        11 => c11_node_pathology(),
        12 => c12_determinism(),
        _ => unreachable!("criterion ids are 1..=12"),
    };
    CriterionResult {
        id,
        name: CRITERIA[(id - 1) as usize].1,
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

// --- 1 -------------------------------------------------------------------

/// Empirical false-positive rate over 1e5 independent trials per grid
/// point (fresh filter, one random non-member query each) within three
/// binomial standard deviations of the analytic formula, for
/// m in 20..=50, n in {4, 8, 12}, k = 5.
fn c1_fpr_grid() -> (bool, Vec<String>) {
    const TRIALS: u32 = 100_000;
    let mut detail = Vec::new();
    let mut worst: (f64, String) = (0.0, String::new());
    let mut failures = 0u32;
    let mut rng = Rng::stream(0xf92a, "fpr-grid", 0);
    for &n in &[4u32, 8, 12] {
        for m in 20..=50u32 {
            let mut hits = 0u32;
            for t in 0..TRIALS {
                let mut bf = BloomFilter::new(m, 5, mix(&[m as u64, n as u64, t as u64]));
                let mut members = Vec::with_capacity(n as usize);
                while members.len() < n as usize {
                    let v = rng.below(1 << 30) as u32;
                    if !members.contains(&v) {
                        members.push(v);
                    }
                }
                for &v in &members {
                    bf.insert(LinkId(v));
                }
                let probe = loop {
                    let v = rng.below(1 << 30) as u32;
                    if !members.contains(&v) {
                        break v;
                    }
                };
                if bf.query(LinkId(probe)) {
                    hits += 1;
                }
            }
            let p_hat = hits as f64 / TRIALS as f64;
            let p = fpr(m, n, 5);
            let sigma = (p * (1.0 - p) / TRIALS as f64).sqrt();
            let dev = (p_hat - p) / sigma;
            if dev.abs() > worst.0.abs() {
                worst = (
                    dev,
                    format!("m={m} n={n}: p_hat={p_hat:.5} p={p:.5} dev={dev:+.1} sigma"),
                );
            }
            if dev.abs() > 3.0 {
                failures += 1;
                if failures <= 8 {
                    detail.push(format!(
                        "outside band: m={m} n={n} p_hat={p_hat:.5} p={p:.5} dev={dev:+.1} sigma"
                    ));
                }
            }
        }
    }
    detail.push(format!("grid points outside 3 sigma: {failures}/93"));
    detail.push(format!("worst deviation: {}", worst.1));
    (failures == 0, detail)
}

// --- 2 -------------------------------------------------------------------

/// Branching Monte-Carlo (1e6 trials, 2n+1 = 9 directions) within 1% of
/// p/(1-3p) per direction at p in {0.05, 0.1, 0.2}.
fn c2_branching() -> (bool, Vec<String>) {
    let mut detail = Vec::new();
    let mut ok = true;
    for (i, &p) in [0.05f64, 0.1, 0.2].iter().enumerate() {
        let mean = branching_mc(p, 9, 1_000_000, 64, 0xb0 + i as u64) / 9.0;
        let expect = expected_wrong_hops(p).unwrap();
        let rel = (mean - expect).abs() / expect;
        let pass = rel <= 0.01;
        ok &= pass;
        detail.push(format!(
            "p={p}: mc={mean:.6} closed-form={expect:.6} rel={:.3}% {}",
            rel * 100.0,
            tick(pass)
        ));
    }
    (ok, detail)
}

// --- 3 -------------------------------------------------------------------

/// A single four-hop flow on the 6x11 torus; filter length swept so the
/// per-probe rate covers (0, 0.27) and beyond. Every packet carries its
/// own filter realization, so the comparison is per realization: a
/// packet's wrong-hop count against (2n+1) * p/(1-3p) at that packet's
/// own measured rate, averaged over 500 seeds. Realizations at or beyond
/// the 1/3 pole have no finite expectation (the closed form is a domain
/// error there); they are counted and reported, and their floods are what
/// makes simulation and theory part ways above ~0.27.
fn c3_topology_wrong_hops() -> (bool, Vec<String>) {
    let sweep = wrong_hop_sweep();
    let mut detail = Vec::new();
    let mut ok = true;
    for row in &sweep.rows {
        let fmt = |b: &Bucket| {
            if b.n == 0 {
                "-".to_string()
            } else {
                format!("{:.3}/{:.3}", b.sim / b.n as f64, b.theory / b.n as f64)
            }
        };
        detail.push(format!(
            "m={}: sim/theory by realization rate: <=0.1 {}  0.1-0.27 {}  >0.27 {}  \
             divergent {}/{}",
            row.m,
            fmt(&row.slices[0]),
            fmt(&row.slices[1]),
            fmt(&row.slices[2]),
            row.divergent,
            row.total
        ));
    }
    for (idx, (label, band)) in [("p <= 0.1", 0.05), ("0.1 < p <= 0.27", 0.15)]
        .iter()
        .enumerate()
    {
        let b = &sweep.totals[idx];
        let sim = b.sim / b.n as f64;
        let theory = b.theory / b.n as f64;
        let rel = (sim - theory).abs() / theory;
        let pass = rel <= *band;
        ok &= pass;
        detail.push(format!(
            "{label}: {} packets, sim {sim:.4} vs theory {theory:.4}, rel {:.1}% \
             (band {:.0}%) {}",
            b.n,
            rel * 100.0,
            band * 100.0,
            tick(pass)
        ));
    }
    let b = &sweep.totals[2];
    if b.n > 0 {
        detail.push(format!(
            "0.27 < p < 1/3: {} packets, sim {:.2} vs model {:.2} -- the regime where \
             loop suppression and the idealized branching part ways (reported)",
            b.n,
            b.sim / b.n as f64,
            b.theory / b.n as f64
        ));
    }
    (ok, detail)
}

#[derive(Clone, Copy, Default)]
pub struct Bucket {
    pub n: u64,
    pub sim: f64,
    pub theory: f64,
}

pub struct SweepRow {
    pub m: u32,
    pub slices: [Bucket; 3],
    pub divergent: u64,
    pub total: u64,
}

pub struct WrongHopSweep {
    pub rows: Vec<SweepRow>,
    pub totals: [Bucket; 3],
}

/// The wrong-hop verification runs behind criterion 3: a four-hop flow,
/// 500 seeds per filter length, every packet compared against the closed
/// form at its own realization rate.
pub fn wrong_hop_sweep() -> WrongHopSweep {
    let base = crate::simcmd::preset("fig8").unwrap();
    let scn0 = Scenario::parse(base).unwrap();
    let c = Constellation::build(scn0.orbits, scn0.sats, scn0.altitude_km, scn0.seam).unwrap();
    let src = c.sat(0, 0);
    let dst = c.sat(0, 4);
    let path = lir_core::forwarding::compute_route(&c, src, dst, |_| true).unwrap();
    let probe_ids: Vec<LinkId> = c
        .links()
        .iter()
        .map(|l| l.id)
        .filter(|id| !path.contains(id))
        .collect();
    let mut totals = [Bucket::default(); 3];
    let mut rows = Vec::new();
    for &m in &[15u32, 16, 17, 18, 20, 23, 27, 32, 40, 50] {
        let mut scn = Scenario::parse(base).unwrap();
        scn.bf_m = BfLength::Fixed(m);
        let ctx = SimContext::new(&scn).unwrap();
        let mut slices = [Bucket::default(); 3];
        let mut divergent = 0u64;
        let mut total = 0u64;
        for seed in 1..=500u64 {
            let metrics = ctx.run(seed);
            let f = &metrics.flows[0];
            // reconstruct each packet's filter realization and its
            // per-probe positive rate over the non-path identifiers
            let hash_base = Rng::stream(seed, "hash", 0).next_u64();
            for uid in 1..=f.sent {
                let salt = mix(&[hash_base, 0, uid]);
                let bf = lir_core::forwarding::encode_path(&path, m, 5, salt);
                let positives = probe_ids.iter().filter(|&&id| bf.query(id)).count();
                let p_r = positives as f64 / probe_ids.len() as f64;
                let junk = f.misrouted_by_seq.get(&uid).copied().unwrap_or(0) as f64;
                total += 1;
                if p_r >= 1.0 / 3.0 {
                    divergent += 1;
                    continue;
                }
                let idx = if p_r <= 0.1 {
                    0
                } else if p_r <= 0.27 {
                    1
                } else {
                    2
                };
                let theory = 9.0 * expected_wrong_hops(p_r).unwrap();
                for b in [&mut slices[idx], &mut totals[idx]] {
                    b.n += 1;
                    b.sim += junk;
                    b.theory += theory;
                }
            }
        }
        rows.push(SweepRow {
            m,
            slices,
            divergent,
            total,
        });
    }
    WrongHopSweep { rows, totals }
}

// --- 4 -------------------------------------------------------------------

/// f(n) non-decreasing with non-decreasing forward differences over 1..=12
/// at k=5, c=8192 bits.
fn c4_curve_shape() -> (bool, Vec<String>) {
    let params = OverheadParams::default();
    let curve = OverheadCurve::optimal(12, &params);
    let mut ok = true;
    let mut detail = Vec::new();
    let mut last_diff = 0.0;
    for n in 1..=11u32 {
        let diff = curve.f(n + 1) - curve.f(n);
        let pass = diff >= 0.0 && diff >= last_diff - 1e-9;
        ok &= pass;
        detail.push(format!(
            "f({})-f({n}) = {diff:.3} bits {}",
            n + 1,
            tick(pass)
        ));
        last_diff = diff;
    }
    (ok, detail)
}

// --- 5 -------------------------------------------------------------------

/// The dynamic program equals the independent exhaustive oracle for every
/// n in 1..=12 under 20 random parameter draws.
fn c5_dp_vs_enumeration() -> (bool, Vec<String>) {
    let mut rng = Rng::stream(0xd5, "draws", 0);
    let mut ok = true;
    let mut detail = Vec::new();
    for draw in 0..20 {
        let params = OverheadParams {
            payload_bits: 1000.0 + rng.below(19_000) as f64,
            hash_count: 5,
            bandwidth_bps: 1.0e6 * (1.0 + rng.below(99) as f64),
            reencode_delay_s: 1.0e-6 * (1.0 + rng.below(99) as f64),
        };
        let curve = OverheadCurve::optimal(12, &params);
        let mut f_ref = vec![0.0];
        for n in 1..=12u64 {
            f_ref.push(m_scan(n, 5, params.payload_bits, 20_000).1);
        }
        let mut worst = 0.0f64;
        for n in 1..=12usize {
            let sol = solve_dp(n, &curve, &params);
            let (_, oracle_cost) = min_policy_cost(
                n,
                &f_ref[..=n],
                params.bandwidth_bps,
                params.reencode_delay_s,
            );
            let replay = policy_cost(
                sol.policy.bits(),
                &f_ref[..=n],
                params.bandwidth_bps,
                params.reencode_delay_s,
            );
            let rel = ((sol.h[n] - oracle_cost).abs() / oracle_cost)
                .max((replay - oracle_cost).abs() / oracle_cost);
            worst = worst.max(rel);
            ok &= rel <= 1e-9;
        }
        detail.push(format!(
            "draw {draw}: c={} b={} tau={}us worst rel dev {:.2e} {}",
            params.payload_bits,
            params.bandwidth_bps,
            params.reencode_delay_s * 1.0e6,
            worst,
            tick(worst <= 1e-9)
        ));
    }
    (ok, detail)
}

// --- 6 -------------------------------------------------------------------

/// At the default parameters the optimal policy never costs more than
/// source encoding for n in 3..=12, and the gap never shrinks.
fn c6_single_flow_gap() -> (bool, Vec<String>) {
    let params = OverheadParams::default();
    let curve = OverheadCurve::optimal(12, &params);
    let mut detail = Vec::new();
    let mut ok = true;
    let mut last_gap = f64::NEG_INFINITY;
    for n in 3..=12usize {
        let opt = solve_dp(n, &curve, &params).h[n];
        let src = evaluate(&EncodingPolicy::source(n), &curve, &params);
        let gap = src - opt;
        let pass = gap >= -1e-15 && gap >= last_gap - 1e-12;
        ok &= pass;
        detail.push(format!(
            "n={n}: source {:.3} us, optimal {:.3} us, gap {:.3} us {}",
            src * 1.0e6,
            opt * 1.0e6,
            gap * 1.0e6,
            tick(pass)
        ));
        last_gap = gap;
    }
    (ok, detail)
}

// --- 7 -------------------------------------------------------------------

/// Four two-way 1250 packet/s flow pairs; mean queuing delay of the
/// optimal policy never exceeds source encoding for any filter length in
/// {30, 40, 50, 60, 70}, with a gap of at least 20% at 30 bits and at most
/// 5% at 70 bits, over 20 seeds.
fn c7_multiflow_queuing() -> (bool, Vec<String>) {
    let base = crate::simcmd::preset("fig10").unwrap();
    let mut detail = Vec::new();
    let mut ok = true;
    for &m in &[30u32, 40, 50, 60, 70] {
        let mut queuing = [0.0f64; 2];
        for (mi, mode) in [Mode::UnicastSource, Mode::UnicastOptimal]
            .iter()
            .enumerate()
        {
            let mut scn = Scenario::parse(base).unwrap();
            scn.bf_m = BfLength::Fixed(m);
            scn.mode = *mode;
            scn.seeds = (1, 20);
            let ctx = SimContext::new(&scn).unwrap();
            let mut q_ns = 0u128;
            let mut samples = 0u64;
            for seed in 1..=20u64 {
                let metrics = ctx.run(seed);
                for f in &metrics.flows {
                    q_ns += f.queue_ns;
                    samples += f.delay_samples_ns.len() as u64;
                }
            }
            queuing[mi] = q_ns as f64 / samples.max(1) as f64 / 1.0e6;
        }
        let (src, opt) = (queuing[0], queuing[1]);
        let gap = (src - opt) / src.max(1e-12);
        let pass = opt <= src * (1.0 + 1e-9)
            && match m {
                30 => gap >= 0.20,
                70 => gap <= 0.05,
                _ => true,
            };
        ok &= pass;
        detail.push(format!(
            "m={m}: queuing source {src:.3} ms, optimal {opt:.3} ms, gap {:.1}% {}",
            gap * 100.0,
            tick(pass)
        ));
    }
    (ok, detail)
}

// --- 8 -------------------------------------------------------------------

/// 100 packet/s flow under stationary failure fractions 5..20%: rerouting
/// and detouring deliver within 2 points of each other and both beat
/// announcement flooding; hop-by-hop forwarding on flooded state delivers
/// at least as much as source routing on it but with no smaller delay;
/// rerouting is never slower than detouring. 50 seeds per cell.
fn c8_failure_ordering() -> (bool, Vec<String>) {
    let base = crate::simcmd::preset("fig11").unwrap();
    let mut detail = Vec::new();
    let mut ok = true;
    for &rate in &[0.05f64, 0.10, 0.15, 0.20] {
        let mut pdr = [0.0f64; 4];
        let mut delay = [0.0f64; 4];
        for (i, mgmt) in [
            Management::Lsa,
            Management::Odr,
            Management::Odd,
            Management::OspfLsa,
        ]
        .iter()
        .enumerate()
        {
            let mut scn = Scenario::parse(base).unwrap();
            scn.failure_rate = rate;
            scn.management = *mgmt;
            scn.odd_fallback = *mgmt == Management::Odd;
            scn.seeds = (1, 50);
            let ctx = SimContext::new(&scn).unwrap();
            let (mut delivered, mut expected) = (0u64, 0u64);
            let (mut delay_ns, mut samples) = (0u128, 0u64);
            for seed in 1..=50u64 {
                let m = ctx.run(seed);
                let f = &m.flows[0];
                delivered += f.delivered;
                expected += f.expected;
                delay_ns += f.delay_samples_ns.iter().map(|&x| x as u128).sum::<u128>();
                samples += f.delay_samples_ns.len() as u64;
            }
            pdr[i] = delivered as f64 / expected as f64;
            delay[i] = delay_ns as f64 / samples.max(1) as f64 / 1.0e6;
        }
        let (lsa, odr, odd, ospf) = (0, 1, 2, 3);
        let checks = [
            (
                (pdr[odr] - pdr[odd]).abs() <= 0.02,
                "odr~odd pdr within 2pt",
            ),
            (pdr[odr] > pdr[lsa], "odr pdr > lsa"),
            (pdr[odd] > pdr[lsa], "odd pdr > lsa"),
            (pdr[ospf] >= pdr[lsa], "ospf pdr >= lsa"),
            (delay[ospf] >= delay[lsa], "ospf delay >= lsa"),
            (delay[odr] <= delay[odd] * (1.0 + 1e-9), "odr delay <= odd"),
        ];
        let all = checks.iter().all(|(p, _)| *p);
        ok &= all;
        let failed: Vec<&str> = checks.iter().filter(|(p, _)| !p).map(|(_, n)| *n).collect();
        detail.push(format!(
            "rate {:.0}%: pdr lsa/odr/odd/ospf = {:.3}/{:.3}/{:.3}/{:.3}  delay = {:.2}/{:.2}/{:.2}/{:.2} ms {}{}",
            rate * 100.0,
            pdr[lsa], pdr[odr], pdr[odd], pdr[ospf],
            delay[lsa], delay[odr], delay[odd], delay[ospf],
            tick(all),
            if failed.is_empty() { String::new() } else { format!("  failed: {}", failed.join(", ")) }
        ));
    }
    (ok, detail)
}

// --- 9 -------------------------------------------------------------------

/// Explicit-list baseline at the 264-link grid: for n in 2..=12 and
/// target rates 0.1% / 1% / 5%, the filter header must beat the explicit
/// header on payload ratio and the total forwarding overhead must stay
/// below n^2 * ceil(log2 links).
fn c9_elr_comparison() -> (bool, Vec<String>) {
    let params = OverheadParams::default();
    let l = 264u64;
    let bits = elr_bits_per_id(l);
    let mut detail = Vec::new();
    let mut failures = 0u32;
    let mut checked = 0u32;
    for &target in &[0.001f64, 0.01, 0.05] {
        for n in 2..=12u32 {
            checked += 2;
            let m = min_m_for_fpr(n, 5, target);
            let elr_header = n as u64 * bits;
            let ratio_ok = (m as u64) < elr_header;
            let lir_total = total_overhead_bits(n, m, &params).unwrap_or(f64::INFINITY);
            let elr_total = ((n as u64) * (n as u64) * bits) as f64;
            let total_ok = lir_total < elr_total;
            failures += (!ratio_ok as u32) + (!total_ok as u32);
            if (!ratio_ok || !total_ok) && detail.len() < 10 {
                detail.push(format!(
                    "target {:.1}% n={n}: header {m} vs {elr_header} bits {}, total {lir_total:.0} vs {elr_total:.0} bits {}",
                    target * 100.0,
                    tick(ratio_ok),
                    tick(total_ok)
                ));
            }
        }
    }
    detail.push(format!("failed comparisons: {failures}/{checked}"));
    (failures == 0, detail)
}

// --- 10 ------------------------------------------------------------------

/// The two-destination worked example encodes exactly five identifiers
/// under shortest-path-first and four under the primary-node tree; over
/// one-to-n flows at 1.6 Mbit/s the aggregate ordering over group sizes
/// 2..=6 is PNB >= SPF > unicast-optimal > unicast-source on both mean
/// delay and delivery ratio (PNB within noise of SPF on delay), 20 seeds.
fn c10_multicast() -> (bool, Vec<String>) {
    let mut detail = Vec::new();
    let mut ok = true;

    // worked example
    let c = Constellation::build(6, 11, 780.0, false).unwrap();
    let src = c.sat(0, 0);
    let dests = [c.sat(1, 2), c.sat(1, 3)];
    let spf = spf_tree(&c, src, &dests, |_| true).unwrap();
    let primary = choose_primary(&c, src, &dests);
    let pnb = pnb_tree(&c, src, &dests, primary, |_| true).unwrap();
    let example_ok = spf.len() == 5 && pnb.len() == 4 && primary == c.sat(1, 2);
    ok &= example_ok;
    detail.push(format!(
        "worked example: spf {} ids, pnb {} ids, primary (1,2) {}",
        spf.len(),
        pnb.len(),
        tick(example_ok)
    ));

    // one-to-n sweep, aggregated over group sizes
    let base = crate::simcmd::preset("fig13").unwrap();
    let modes = [
        Mode::MulticastPnb,
        Mode::MulticastSpf,
        Mode::UnicastOptimal,
        Mode::UnicastSource,
    ];
    let mut delay = [0.0f64; 4];
    let mut pdr = [0.0f64; 4];
    for (mi, mode) in modes.iter().enumerate() {
        let (mut delay_ns, mut samples) = (0u128, 0u64);
        let (mut delivered, mut expected) = (0u64, 0u64);
        for group in 2..=6usize {
            let mut scn = Scenario::parse(base).unwrap();
            scn.mode = *mode;
            scn.seeds = (1, 20);
            for f in &mut scn.flows {
                f.dsts.truncate(group);
            }
            let ctx = SimContext::new(&scn).unwrap();
            for seed in 1..=20u64 {
                let m = ctx.run(seed);
                for f in &m.flows {
                    delay_ns += f.delay_samples_ns.iter().map(|&x| x as u128).sum::<u128>();
                    samples += f.delay_samples_ns.len() as u64;
                    delivered += f.delivered;
                    expected += f.expected;
                }
            }
        }
        delay[mi] = delay_ns as f64 / samples.max(1) as f64 / 1.0e6;
        pdr[mi] = delivered as f64 / expected as f64;
    }
    let (pnb_i, spf_i, uo, us) = (0, 1, 2, 3);
    let checks = [
        (
            delay[pnb_i] <= delay[spf_i] * 1.05,
            "pnb delay <= spf within noise",
        ),
        (delay[spf_i] < delay[uo], "spf delay < unicast-optimal"),
        (
            delay[uo] < delay[us],
            "unicast-optimal delay < unicast-source",
        ),
        (pdr[pnb_i] >= pdr[spf_i] - 0.005, "pnb pdr ~ spf"),
        (pdr[spf_i] > pdr[uo], "spf pdr > unicast-optimal"),
        (pdr[uo] > pdr[us], "unicast-optimal pdr > unicast-source"),
    ];
    let all = checks.iter().all(|(p, _)| *p);
    ok &= all;
    let failed: Vec<&str> = checks.iter().filter(|(p, _)| !p).map(|(_, n)| *n).collect();
    detail.push(format!(
        "aggregate delay pnb/spf/uopt/usrc = {:.3}/{:.3}/{:.3}/{:.3} ms {}",
        delay[0],
        delay[1],
        delay[2],
        delay[3],
        tick(all)
    ));
    detail.push(format!(
        "aggregate pdr  pnb/spf/uopt/usrc = {:.4}/{:.4}/{:.4}/{:.4}{}",
        pdr[0],
        pdr[1],
        pdr[2],
        pdr[3],
        if failed.is_empty() {
            String::new()
        } else {
            format!("  failed: {}", failed.join(", "))
        }
    ));
    (ok, detail)
}

// --- 11 ------------------------------------------------------------------

/// Node-identified encoding of the counterexample group duplicates at
/// least one delivery and loops until the hop limit; the link-identified
/// tree at zero false positives delivers exactly one copy per destination
/// with no loop kills.
fn c11_node_pathology() -> (bool, Vec<String>) {
    let c = Constellation::build(6, 11, 780.0, false).unwrap();
    let src = c.sat(0, 0);
    let dests = [c.sat(1, 1), c.sat(2, 1), c.sat(2, 0)];
    let tree = spf_tree(&c, src, &dests, |_| true).unwrap();
    let link = link_identified_walk(&c, src, &dests, &tree, 2048, 5, 1, 64);
    let nodes = tree_nodes(&c, src, &tree);
    let node = node_identified_walk(&c, src, &dests, &nodes, 2048, 5, 1, 24);
    let link_ok =
        link.first_copies == vec![1, 1, 1] && link.duplicate_deliveries == 0 && link.ttl_drops == 0;
    let node_ok = node.duplicate_deliveries >= 1 && node.ttl_drops >= 1;
    let detail = vec![
        format!(
            "link-identified: copies {:?}, duplicates {}, loop kills {} {}",
            link.first_copies,
            link.duplicate_deliveries,
            link.ttl_drops,
            tick(link_ok)
        ),
        format!(
            "node-identified: duplicates {}, loop kills {} {}",
            node.duplicate_deliveries,
            node.ttl_drops,
            tick(node_ok)
        ),
    ];
    (link_ok && node_ok, detail)
}

// --- 12 ------------------------------------------------------------------

/// Any scenario rerun with the same seed emits byte-identical CSV.
fn c12_determinism() -> (bool, Vec<String>) {
    let mut detail = Vec::new();
    let mut ok = true;
    for name in ["fig9", "fig11", "fig13"] {
        let mut scn = Scenario::parse(crate::simcmd::preset(name).unwrap()).unwrap();
        scn.seeds = (5, 7);
        if name == "fig11" {
            scn.failure_rate = 0.15;
        }
        let a = crate::simcmd::run_sweep(&scn, false).unwrap();
        let b = crate::simcmd::run_sweep(&scn, false).unwrap();
        let same = a.flows_csv == b.flows_csv && a.links_csv == b.links_csv;
        ok &= same;
        detail.push(format!(
            "{name}: {} flow bytes, {} link bytes {}",
            a.flows_csv.len(),
            a.links_csv.len(),
            tick(same)
        ));
    }
    (ok, detail)
}

// ---------------------------------------------------------------------------

/// CSV projection of the wrong-hop verification sweep (the same runs as
/// criterion 3), for plotting the overlap region.
pub fn wrong_hop_csv() -> String {
    let sweep = wrong_hop_sweep();
    let mut out =
        String::from("m,slice,packets,sim_mean_wrong_hops,theory_wrong_hops,divergent,total\n");
    for row in &sweep.rows {
        for (idx, label) in ["p<=0.1", "0.1<p<=0.27", "0.27<p<1/3"].iter().enumerate() {
            let b = &row.slices[idx];
            if b.n == 0 {
                continue;
            }
            out.push_str(&format!(
                "{},{label},{},{:.6},{:.6},{},{}\n",
                row.m,
                b.n,
                b.sim / b.n as f64,
                b.theory / b.n as f64,
                row.divergent,
                row.total
            ));
        }
    }
    out
}

fn tick(ok: bool) -> &'static str {
    if ok {
        "[ok]"
    } else {
        "[FAIL]"
    }
}

/// Runs the listed criteria (all twelve when empty) and renders one line
/// per criterion plus detail when requested.
pub fn run_all(ids: &[u32], verbose: bool) -> (bool, String) {
    let ids: Vec<u32> = if ids.is_empty() {
        (1..=12).collect()
    } else {
        ids.to_vec()
    };
    let mut out = String::new();
    let mut all = true;
    for id in ids {
        let r = run_criterion(id);
        all &= r.passed;
        let _ = writeln!(
            out,
            "criterion {:2} {:55} {:4} ({:.1}s)",
            r.id,
            r.name,
            if r.passed { "PASS" } else { "FAIL" },
            r.seconds
        );
        if verbose || !r.passed {
            for line in &r.detail {
                let _ = writeln!(out, "    {line}");
            }
        }
    }
    (all, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn criterion_selectors() {
        assert_eq!(parse_criteria(&["3".into()]).unwrap(), vec![3]);
        assert_eq!(parse_criteria(&["1,2".into(), "5".into()]).unwrap(), vec![1, 2, 5]);
        assert!(parse_criteria(&["0".into()]).is_err());
        assert!(parse_criteria(&["13".into()]).is_err());
        assert!(parse_criteria(&["one".into()]).is_err());
    }

    #[test]
    fn fast_criteria_hold() {
        for id in [4, 6, 11] {
            let r = run_criterion(id);
            assert!(r.passed, "criterion {id}:\n{}", r.detail.join("\n"));
        }
    }
}

/// Validates criterion selectors from the command line.
pub fn parse_criteria(specs: &[String]) -> Result<Vec<u32>, String> {
    let known: BTreeSet<u32> = (1..=12).collect();
    let mut out = Vec::new();
    for s in specs {
        for part in s.split(',') {
            let id: u32 = part
                .trim()
                .parse()
                .map_err(|_| format!("unknown criterion `{part}`"))?;
            if !known.contains(&id) {
                return Err(format!("unknown criterion `{id}`, expected 1..=12"));
            }
            out.push(id);
        }
    }
    Ok(out)
}
