//! Analytic tables: false-positive curves, the optimal-length overhead
//! curve, the explicit-list baseline, and wrong-hop expectations.

use lir_core::analytics::{
    elr_bits_per_id, elr_overhead, expected_wrong_hops, min_m_for_fpr, optimal_bf,
    total_overhead_bits, OverheadParams,
};
use lir_core::bloom::fpr;

/// `(m, n, fpr)` rows over a filter-length range for each element count.
pub fn fpr_table(m_range: (u32, u32), ns: &[u32], k: u32) -> String {
    let mut out = String::from("m,n,k,fpr\n");
    for &n in ns {
        for m in m_range.0..=m_range.1 {
            out.push_str(&format!("{m},{n},{k},{:.9}\n", fpr(m, n, k)));
        }
    }
    out
}

/// `(n, m_star, f_bits, f_over_b_us)` rows of the optimal-length curve.
pub fn fn_table(n_range: (u32, u32), params: &OverheadParams) -> String {
    let mut out = String::from("n,m_star,f_bits,f_transmit_us\n");
    for n in n_range.0..=n_range.1 {
        let (m, f) = optimal_bf(n, params);
        out.push_str(&format!(
            "{n},{m},{f:.6},{:.3}\n",
            f / params.bandwidth_bps * 1.0e6
        ));
    }
    out
}

/// Explicit-list baseline rows: header and total overhead for `n` hops.
pub fn elr_table(n_range: (u32, u32), l: u64) -> String {
    let bits = elr_bits_per_id(l);
    let mut out = String::from("n,l,bits_per_id,header_bits,total_bits\n");
    for n in n_range.0..=n_range.1 {
        let (header, total) = elr_overhead(n, l);
        out.push_str(&format!("{n},{l},{bits},{header},{total}\n"));
    }
    out
}

/// Side-by-side comparison at target false-positive rates: filter length
/// for the target vs the explicit list, plus both total overheads.
pub fn elr_compare_table(
    n_range: (u32, u32),
    l: u64,
    targets: &[f64],
    params: &OverheadParams,
) -> String {
    let bits = elr_bits_per_id(l);
    let mut out = String::from(
        "n,target_fpr,lir_m,lir_header_bits,elr_header_bits,lir_total_bits,elr_total_bits,lir_payload_ratio,elr_payload_ratio\n",
    );
    for &t in targets {
        for n in n_range.0..=n_range.1 {
            let m = min_m_for_fpr(n, params.hash_count, t);
            let lir_total = total_overhead_bits(n, m, params)
                .map(|f| format!("{f:.3}"))
                .unwrap_or_else(|_| "inf".into());
            let elr_header = n as u64 * bits;
            let c = params.payload_bits;
            out.push_str(&format!(
                "{n},{t},{m},{m},{elr_header},{lir_total},{},{:.6},{:.6}\n",
                (n as u64) * (n as u64) * bits,
                c / (c + m as f64),
                c / (c + elr_header as f64),
            ));
        }
    }
    out
}

/// Expected wrong hops per wrong direction and per `n`-hop delivery.
pub fn wrong_hop_table(ps: &[f64], n: u32) -> String {
    let mut out = String::from("p,per_direction,per_delivery\n");
    for &p in ps {
        match expected_wrong_hops(p) {
            Ok(e) => out.push_str(&format!("{p},{e:.9},{:.9}\n", (2 * n + 1) as f64 * e)),
            Err(_) => out.push_str(&format!("{p},divergent,divergent\n")),
        }
    }
    out
}

/// Parses `lo..hi` (inclusive) or a single value.
pub fn parse_range(s: &str) -> Option<(u32, u32)> {
    if let Some((a, b)) = s.split_once("..") {
        let lo = a.trim().parse().ok()?;
        let hi = b.trim().parse().ok()?;
        (lo <= hi).then_some((lo, hi))
    } else {
        let v = s.trim().parse().ok()?;
        Some((v, v))
    }
}

/// Parses a comma-separated list of numbers.
pub fn parse_list<T: std::str::FromStr>(s: &str) -> Option<Vec<T>> {
    s.split(',').map(|p| p.trim().parse().ok()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_and_lists() {
        assert_eq!(parse_range("1..12"), Some((1, 12)));
        assert_eq!(parse_range("7"), Some((7, 7)));
        assert_eq!(parse_range("9..2"), None);
        assert_eq!(parse_list::<u32>("4,8,12"), Some(vec![4, 8, 12]));
    }

    #[test]
    fn tables_have_headers_and_rows() {
        let params = OverheadParams::default();
        let t = fn_table((1, 3), &params);
        assert_eq!(t.lines().count(), 4);
        assert!(t.starts_with("n,m_star"));
        let t = fpr_table((20, 22), &[4], 5);
        assert_eq!(t.lines().count(), 4);
        let t = elr_table((1, 2), 264);
        assert!(t.contains("1,264,9,9,9"));
    }
}
