//! Interactive browser demo. Three operations, each returning a JSON
//! string for the page to render:
//!
//! * [`overhead_curves`] — the optimal-length forwarding-overhead curve
//!   next to the explicit-list baseline;
//! * [`encoding_plan`] — the optimal segment-encoding policy for a hop
//!   count, with the prefix-cost table;
//! * [`forwarding_walk`] — one packet pushed through the grid by filter
//!   queries, false positives included, as an animatable traversal list.
//!
//! Build with `wasm-pack build --target web crates/wasm` (or
//! `cargo build --target wasm32-unknown-unknown` plus `wasm-bindgen`);
//! `www/index.html` loads the generated module.

use std::collections::VecDeque;
use std::fmt::Write as _;

use lir_core::analytics::{elr_overhead, OverheadCurve, OverheadParams};
use lir_core::encoding::{evaluate, solve_dp, EncodingPolicy};
use lir_core::forwarding::{compute_route, encode_path};
use lir_core::rng::mix;
use lir_core::{Constellation, LinkId};
use wasm_bindgen::prelude::wasm_bindgen;

fn params(k: u32, c_bits: f64, b_mbps: f64, tau_us: f64) -> OverheadParams {
    OverheadParams {
        payload_bits: c_bits.max(1.0),
        hash_count: k.clamp(1, 16),
        bandwidth_bps: b_mbps.max(0.001) * 1.0e6,
        reencode_delay_s: tau_us.max(0.0) * 1.0e-6,
    }
}

/// Rows of `f(n)` under the optimal filter length, with the explicit-list
/// baseline at `l` total links for comparison.
#[wasm_bindgen]
pub fn overhead_curves(
    k: u32,
    c_bits: f64,
    b_mbps: f64,
    tau_us: f64,
    n_max: u32,
    l: u32,
) -> String {
    let n_max = n_max.clamp(1, 24);
    let p = params(k, c_bits, b_mbps, tau_us);
    let curve = OverheadCurve::optimal(n_max, &p);
    let mut rows = String::new();
    for n in 1..=n_max {
        let (elr_header, elr_total) = elr_overhead(n, l.max(2) as u64);
        let _ = write!(
            rows,
            "{}{{\"n\":{n},\"m\":{},\"f_bits\":{:.3},\"elr_header\":{elr_header},\"elr_total\":{elr_total}}}",
            if n == 1 { "" } else { "," },
            curve.m(n),
            curve.f(n),
        );
    }
    format!("{{\"rows\":[{rows}]}}")
}

/// Optimal segment-encoding policy for `hops` identifiers. `m_bits` zero
/// means "optimal length per segment".
#[wasm_bindgen]
pub fn encoding_plan(
    hops: u32,
    m_bits: u32,
    k: u32,
    c_bits: f64,
    b_mbps: f64,
    tau_us: f64,
) -> String {
    let hops = hops.clamp(1, 24) as usize;
    let p = params(k, c_bits, b_mbps, tau_us);
    let curve = if m_bits == 0 {
        OverheadCurve::optimal(hops as u32, &p)
    } else {
        OverheadCurve::fixed(hops as u32, m_bits, &p)
    };
    let sol = solve_dp(hops, &curve, &p);
    let src = evaluate(&EncodingPolicy::source(hops), &curve, &p);
    let mut bits = String::new();
    for (i, b) in sol.policy.bits().iter().enumerate() {
        let _ = write!(bits, "{}{}", if i == 0 { "" } else { "," }, *b as u8);
    }
    let mut segs = String::new();
    for (i, s) in sol.policy.segments().iter().enumerate() {
        let _ = write!(
            segs,
            "{}{{\"encoder\":{},\"len\":{},\"m\":{}}}",
            if i == 0 { "" } else { "," },
            s.encoder,
            s.len,
            curve.m(s.len as u32)
        );
    }
    let mut h = String::new();
    for (i, v) in sol.h.iter().enumerate() {
        let _ = write!(h, "{}{:.4}", if i == 0 { "" } else { "," }, v * 1.0e6);
    }
    format!(
        "{{\"policy\":[{bits}],\"segments\":[{segs}],\"h_us\":[{h}],\
         \"optimal_us\":{:.4},\"source_us\":{:.4}}}",
        sol.h[hops] * 1.0e6,
        src * 1.0e6
    )
}

/// One packet forwarded from `(src_o, src_s)` to `(dst_o, dst_s)` on a
/// `orbits x sats` grid by membership queries against an `m`-bit filter.
/// Returns the grid, the intended path, and every traversal in breadth
/// order, wrong turns marked.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn forwarding_walk(
    orbits: u16,
    sats: u16,
    m: u32,
    k: u32,
    seed: u32,
    src_o: u16,
    src_s: u16,
    dst_o: u16,
    dst_s: u16,
) -> String {
    let orbits = orbits.clamp(2, 24);
    let sats = sats.clamp(3, 40);
    let c = match Constellation::build(orbits, sats, 780.0, false) {
        Ok(c) => c,
        Err(e) => return format!("{{\"error\":\"{e}\"}}"),
    };
    let src = c.sat(src_o.min(orbits - 1), src_s.min(sats - 1));
    let dst = c.sat(dst_o.min(orbits - 1), dst_s.min(sats - 1));
    if src == dst {
        return "{\"error\":\"source equals destination\"}".into();
    }
    let path = compute_route(&c, src, dst, |_| true).expect("full torus is connected");
    let bf = encode_path(
        &path,
        m.clamp(8, 4096),
        k.clamp(1, 16),
        mix(&[seed as u64, 0x3a1f]),
    );

    // breadth-first copy expansion with the engine's probe rule, bounded
    let mut hops = String::new();
    let mut count = 0usize;
    let mut delivered = 0u32;
    let mut dead_ends = 0u32;
    let mut queue = VecDeque::new();
    queue.push_back((src, None::<LinkId>, 0u32, false));
    while let Some((sat, incoming, depth, misrouted)) = queue.pop_front() {
        if sat == dst {
            delivered += 1;
            continue;
        }
        if depth >= 24 || count >= 400 {
            continue;
        }
        let excluded = incoming.map(|l| c.reverse(l));
        let mut any = false;
        for (id, nbr) in c.neighbors_out(sat) {
            if Some(id) == excluded || !bf.query(id) {
                continue;
            }
            any = true;
            let wrong = misrouted || !path.contains(&id);
            let (fo, fs) = c.orbit_slot(sat);
            let (to, ts) = c.orbit_slot(nbr);
            let _ = write!(
                hops,
                "{}{{\"from\":[{fo},{fs}],\"to\":[{to},{ts}],\"wrong\":{wrong},\"depth\":{depth}}}",
                if count == 0 { "" } else { "," }
            );
            count += 1;
            queue.push_back((nbr, Some(id), depth + 1, wrong));
        }
        if !any {
            dead_ends += 1;
        }
    }
    let mut path_json = String::new();
    for (i, &id) in path.iter().enumerate() {
        let (fo, fs) = c.orbit_slot(c.link(id).src);
        let (to, ts) = c.orbit_slot(c.link(id).dst);
        let _ = write!(
            path_json,
            "{}[[{fo},{fs}],[{to},{ts}]]",
            if i == 0 { "" } else { "," }
        );
    }
    format!(
        "{{\"orbits\":{orbits},\"sats\":{sats},\"src\":[{},{}],\"dst\":[{},{}],\
         \"path\":[{path_json}],\"hops\":[{hops}],\"delivered\":{delivered},\
         \"dead_ends\":{dead_ends}}}",
        src_o.min(orbits - 1),
        src_s.min(sats - 1),
        dst_o.min(orbits - 1),
        dst_s.min(sats - 1)
    )
}
