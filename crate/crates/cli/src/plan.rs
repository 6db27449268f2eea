//! Pretty-printer for the optimal encoding policy of an `n`-hop delivery.

use lir_core::analytics::{OverheadCurve, OverheadParams};
use lir_core::encoding::{brute_force, evaluate, solve_dp, EncodingPolicy};
use lir_core::scenario::BfLength;

pub fn render(hops: usize, m: BfLength, params: &OverheadParams) -> String {
    let curve = match m {
        BfLength::Optimal => OverheadCurve::optimal(hops as u32, params),
        BfLength::Fixed(m) => OverheadCurve::fixed(hops as u32, m, params),
    };
    let sol = solve_dp(hops, &curve, params);
    let src = EncodingPolicy::source(hops);
    let mut out = String::new();
    out.push_str(&format!("hops: {hops}\n"));
    out.push_str(&format!("policy: {}\n", sol.policy.to_string_bits()));
    out.push_str("segments (encoder node, identifiers, filter bits):\n");
    for s in sol.policy.segments() {
        out.push_str(&format!(
            "  node {:2}  len {:2}  m {:4}\n",
            s.encoder,
            s.len,
            curve.m(s.len as u32)
        ));
    }
    out.push_str("prefix costs h(i) in us:\n");
    for (i, h) in sol.h.iter().enumerate() {
        out.push_str(&format!(
            "  h({i:2}) = {:10.3}   pred {}\n",
            h * 1.0e6,
            sol.pred[i]
        ));
    }
    out.push_str(&format!(
        "temporal overhead: optimal {:.3} us, source {:.3} us\n",
        sol.h[hops] * 1.0e6,
        evaluate(&src, &curve, params) * 1.0e6
    ));
    if hops <= 20 {
        let (bp, bc) = brute_force(hops, &curve, params).expect("within enumeration bound");
        let agree = (bc - sol.h[hops]).abs() <= 1e-12 + 1e-9 * bc;
        out.push_str(&format!(
            "exhaustive check: {} ({} at {:.3} us)\n",
            if agree { "agrees" } else { "DISAGREES" },
            bp.to_string_bits(),
            bc * 1.0e6
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_single_hop() {
        let out = render(1, BfLength::Optimal, &OverheadParams::default());
        assert!(out.contains("policy: (1,1)"));
        assert!(out.contains("agrees"));
    }

    #[test]
    fn renders_nine_hop_with_split() {
        let out = render(9, BfLength::Optimal, &OverheadParams::default());
        assert!(out.contains("agrees"), "{out}");
    }
}
