//! Segment-encoding policies and the optimal-policy dynamic program.
//!
//! A policy over an `n`-hop delivery marks which of the `n + 1` path nodes
//! re-encode the in-packet filter; the first and last node are always
//! marked. Each encoding node pays the forwarding overhead of its segment
//! (in transmission time) plus a fixed processing delay, and the optimum
//! trades longer segments (fewer re-encodings) against the convex growth of
//! per-segment overhead.

use crate::analytics::{OverheadCurve, OverheadParams};

/// Binary encoding decisions over path nodes `1..=n+1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodingPolicy {
    x: Vec<bool>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolicyError {
    TooShort,
    EndpointNotSet,
    TooManyHops,
}

impl std::fmt::Display for PolicyError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PolicyError::TooShort => write!(f, "policy needs at least two nodes"),
            PolicyError::EndpointNotSet => write!(f, "first and last decision must be 1"),
            PolicyError::TooManyHops => write!(f, "exhaustive search limited to 20 hops"),
        }
    }
}

impl std::error::Error for PolicyError {}

/// One encoding assignment: the node that re-encodes and how many
/// identifiers it writes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Segment {
    /// 1-based path node doing the encoding
    pub encoder: usize,
    /// identifiers in its segment
    pub len: usize,
}

impl EncodingPolicy {
    pub fn new(x: Vec<bool>) -> Result<Self, PolicyError> {
        if x.len() < 2 {
            return Err(PolicyError::TooShort);
        }
        if !x[0] || !x[x.len() - 1] {
            return Err(PolicyError::EndpointNotSet);
        }
        Ok(EncodingPolicy { x })
    }

    /// Source-only encoding: one segment covering all hops.
    pub fn source(hops: usize) -> Self {
        let mut x = vec![false; hops + 1];
        x[0] = true;
        x[hops] = true;
        EncodingPolicy { x }
    }

    pub fn hops(&self) -> usize {
        self.x.len() - 1
    }

    /// Decision of 1-based node `i`.
    pub fn is_encoder(&self, node: usize) -> bool {
        self.x[node - 1]
    }

    pub fn bits(&self) -> &[bool] {
        &self.x
    }

    /// Smallest encoding node index after `node` (defined for
    /// `1 <= node <= hops`; the final node is always marked).
    pub fn next_encoder(&self, node: usize) -> usize {
        assert!((1..=self.hops()).contains(&node));
        (node + 1..=self.x.len())
            .find(|&i| self.x[i - 1])
            .expect("last node is always an encoder")
    }

    /// Encoding nodes with their segment lengths; lengths sum to `hops()`.
    pub fn segments(&self) -> Vec<Segment> {
        let mut out = Vec::new();
        for node in 1..=self.hops() {
            if self.is_encoder(node) {
                out.push(Segment {
                    encoder: node,
                    len: self.next_encoder(node) - node,
                });
            }
        }
        out
    }

    /// Compact display, e.g. `(1,0,0,1)`.
    pub fn to_string_bits(&self) -> String {
        let inner: Vec<&str> = self.x.iter().map(|&b| if b { "1" } else { "0" }).collect();
        format!("({})", inner.join(","))
    }
}

/// Temporal overhead of a policy in seconds: every encoding node pays its
/// segment's forwarding overhead over the bandwidth plus the processing
/// delay.
pub fn evaluate(policy: &EncodingPolicy, curve: &OverheadCurve, params: &OverheadParams) -> f64 {
    policy
        .segments()
        .iter()
        .map(|s| curve.f(s.len as u32) / params.bandwidth_bps + params.reencode_delay_s)
        .sum()
}

/// Output of the dynamic program: minimal costs of every prefix
/// sub-problem, predecessor choices, and the reconstructed policy.
#[derive(Clone, Debug)]
pub struct DpSolution {
    /// `h[i]` = minimal temporal cost of delivering over the first `i` hops
    /// with node `i + 1` presumed to encode; `h[0] = 0`.
    pub h: Vec<f64>,
    /// `pred[i]` = sub-problem index of the previous encoder (smallest on
    /// ties); the encoding node itself is `pred[i] + 1`.
    pub pred: Vec<usize>,
    pub policy: EncodingPolicy,
}

/// Optimal segment-encoding policy for `hops` identifiers via the prefix
/// recursion `h(i) = min_q h(q) + f(i-q)/B + tau`, `O(n^2)`.
pub fn solve_dp(hops: usize, curve: &OverheadCurve, params: &OverheadParams) -> DpSolution {
    assert!(hops >= 1);
    assert!(curve.max_hops() as usize >= hops, "curve too short");
    let mut h = vec![0.0f64; hops + 1];
    let mut pred = vec![0usize; hops + 1];
    for i in 1..=hops {
        let mut best = f64::INFINITY;
        let mut best_q = 0;
        for q in 0..i {
            let cost =
                h[q] + curve.f((i - q) as u32) / params.bandwidth_bps + params.reencode_delay_s;
            if cost < best {
                best = cost;
                best_q = q;
            }
        }
        h[i] = best;
        pred[i] = best_q;
    }
    let mut x = vec![false; hops + 1];
    x[hops] = true;
    let mut node = hops;
    while node > 0 {
        node = pred[node];
        x[node] = true;
    }
    DpSolution {
        h,
        pred,
        policy: EncodingPolicy { x },
    }
}

/// Exact optimum by enumerating all `2^(hops-1)` policies. Test oracle and
/// cross-check for small instances only.
pub fn brute_force(
    hops: usize,
    curve: &OverheadCurve,
    params: &OverheadParams,
) -> Result<(EncodingPolicy, f64), PolicyError> {
    if hops > 20 {
        return Err(PolicyError::TooManyHops);
    }
    assert!(hops >= 1);
    let mut best: Option<(EncodingPolicy, f64)> = None;
    for mask in 0u32..(1 << (hops - 1)) {
        let mut x = vec![false; hops + 1];
        x[0] = true;
        x[hops] = true;
        for b in 1..hops {
            x[b] = (mask >> (b - 1)) & 1 == 1;
        }
        let p = EncodingPolicy { x };
        let c = evaluate(&p, curve, params);
        match &best {
            Some((_, bc)) if *bc <= c => {}
            _ => best = Some((p, c)),
        }
    }
    Ok(best.unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::OverheadCurve;
    use lir_oracles::policy::{min_policy_cost, policy_cost};
    use lir_oracles::scan::m_scan;

    fn defaults() -> (OverheadCurve, OverheadParams) {
        let params = OverheadParams::default();
        let curve = OverheadCurve::optimal(12, &params);
        (curve, params)
    }

    fn policy(bits: &[u8]) -> EncodingPolicy {
        EncodingPolicy::new(bits.iter().map(|&b| b == 1).collect()).unwrap()
    }

    #[test]
    fn endpoints_must_be_set() {
        assert_eq!(
            EncodingPolicy::new(vec![false, true]).unwrap_err(),
            PolicyError::EndpointNotSet
        );
        assert_eq!(
            EncodingPolicy::new(vec![true]).unwrap_err(),
            PolicyError::TooShort
        );
    }

    #[test]
    fn next_encoder_worked_example() {
        // nine-hop example policy: encoders at nodes 1, 7 and 10
        let p = policy(&[1, 0, 0, 0, 0, 0, 1, 0, 0, 1]);
        for n in 1..=6 {
            assert_eq!(p.next_encoder(n), 7);
        }
        for n in 7..=9 {
            assert_eq!(p.next_encoder(n), 10);
        }
    }

    #[test]
    fn next_encoder_all_ones() {
        let p = policy(&[1, 1, 1, 1, 1]);
        for n in 1..=4 {
            assert_eq!(p.next_encoder(n), n + 1);
        }
    }

    #[test]
    fn segment_plans() {
        let p = policy(&[1, 0, 0, 0, 0, 0, 1, 0, 0, 1]);
        assert_eq!(
            p.segments(),
            vec![
                Segment { encoder: 1, len: 6 },
                Segment { encoder: 7, len: 3 }
            ]
        );
        assert_eq!(
            EncodingPolicy::source(9).segments(),
            vec![Segment { encoder: 1, len: 9 }]
        );
        // lengths always sum to the hop count
        let p = policy(&[1, 0, 1, 1, 0, 0, 0, 1]);
        let total: usize = p.segments().iter().map(|s| s.len).sum();
        assert_eq!(total, 7);
    }

    #[test]
    fn evaluate_single_segment_cases() {
        let (curve, params) = defaults();
        let one = evaluate(&policy(&[1, 1]), &curve, &params);
        assert!(
            (one - (curve.f(1) / params.bandwidth_bps + params.reencode_delay_s)).abs() < 1e-15
        );
        let src = evaluate(&EncodingPolicy::source(9), &curve, &params);
        // frozen: f(9)/B + tau
        assert!((src - 1.610692450842e-4).abs() < 1e-12, "{src}");
    }

    #[test]
    fn evaluate_two_segment_worked_example() {
        // segments of six then three identifiers: [f(6) + f(3)]/B + 2 tau
        let (curve, params) = defaults();
        let p = policy(&[1, 0, 0, 0, 0, 0, 1, 0, 0, 1]);
        let cost = evaluate(&p, &curve, &params);
        assert!((cost - 1.139880332359e-4).abs() < 1e-12, "{cost}");
    }

    #[test]
    fn dp_single_hop() {
        let (curve, params) = defaults();
        let sol = solve_dp(1, &curve, &params);
        assert_eq!(sol.policy, policy(&[1, 1]));
        assert!((sol.h[1] - 1.302916822114e-5).abs() < 1e-12);
    }

    #[test]
    fn dp_frozen_values_at_defaults() {
        let (curve, params) = defaults();
        assert!((solve_dp(4, &curve, &params).h[4] - 4.051259961090e-5).abs() < 1e-12);
        assert!((solve_dp(9, &curve, &params).h[9] - 9.185718960805e-5).abs() < 1e-12);
        assert!((solve_dp(12, &curve, &params).h[12] - 1.215377988327e-4).abs() < 1e-12);
        // twelve hops split into six two-identifier segments
        let twelve = solve_dp(12, &curve, &params);
        let lens: Vec<usize> = twelve.policy.segments().iter().map(|s| s.len).collect();
        assert_eq!(lens, vec![2; 6]);
    }

    #[test]
    fn huge_processing_delay_forces_source_encoding() {
        let (curve, mut params) = defaults();
        params.reencode_delay_s = 1.0e6 * curve.f(12) / params.bandwidth_bps;
        let sol = solve_dp(12, &curve, &params);
        assert_eq!(sol.policy, EncodingPolicy::source(12));
    }

    #[test]
    fn dp_table_is_monotone_and_consistent() {
        let (curve, params) = defaults();
        let sol = solve_dp(12, &curve, &params);
        assert_eq!(sol.h[0], 0.0);
        for i in 0..12 {
            assert!(sol.h[i] <= sol.h[i + 1]);
        }
        let replayed = evaluate(&sol.policy, &curve, &params);
        assert!((replayed - sol.h[12]).abs() < 1e-15);
    }

    #[test]
    fn dp_equals_exhaustive_enumeration_at_defaults() {
        let (curve, params) = defaults();
        for n in 2..=12usize {
            let sol = solve_dp(n, &curve, &params);
            let (bp, bc) = brute_force(n, &curve, &params).unwrap();
            assert!((sol.h[n] - bc).abs() <= 1e-15 + 1e-12 * bc, "n={n}");
            assert_eq!(sol.policy, bp, "n={n}");
        }
    }

    #[test]
    fn dp_matches_independent_oracle_across_parameter_draws() {
        // randomized bandwidth / delay / payload draws vs the oracle
        let mut rng = crate::rng::Rng::seeded(0xD0);
        for draw in 0..20 {
            let params = OverheadParams {
                payload_bits: 1000.0 + rng.below(19_000) as f64,
                hash_count: 5,
                bandwidth_bps: 1.0e6 * (1.0 + rng.below(99) as f64),
                reencode_delay_s: 1.0e-6 * (1.0 + rng.below(99) as f64),
            };
            let curve = OverheadCurve::optimal(12, &params);
            let f_ref: Vec<f64> = (0..=12u32)
                .map(|n| {
                    if n == 0 {
                        0.0
                    } else {
                        m_scan(n as u64, 5, params.payload_bits, 20_000).1
                    }
                })
                .collect();
            for n in 1..=12usize {
                let sol = solve_dp(n, &curve, &params);
                let (ox, oc) = min_policy_cost(
                    n,
                    &f_ref[..=n],
                    params.bandwidth_bps,
                    params.reencode_delay_s,
                );
                assert!(
                    (sol.h[n] - oc).abs() <= 1e-15 + 1e-9 * oc,
                    "draw={draw} n={n}: {} vs {oc}",
                    sol.h[n]
                );
                let replay = policy_cost(
                    sol.policy.bits(),
                    &f_ref[..=n],
                    params.bandwidth_bps,
                    params.reencode_delay_s,
                );
                assert!((replay - oc).abs() <= 1e-15 + 1e-9 * oc);
                let _ = ox;
            }
        }
    }

    #[test]
    fn brute_force_guards_width() {
        let (curve, params) = defaults();
        assert_eq!(
            brute_force(21, &curve, &params).unwrap_err(),
            PolicyError::TooManyHops
        );
    }

    #[test]
    fn tie_breaks_are_deterministic() {
        let (curve, params) = defaults();
        let a = solve_dp(9, &curve, &params);
        let b = solve_dp(9, &curve, &params);
        assert_eq!(a.policy, b.policy);
        assert_eq!(a.pred, b.pred);
    }
}
