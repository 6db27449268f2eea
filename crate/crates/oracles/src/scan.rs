//! Exhaustive scan for the overhead-minimizing Bloom-filter length.
//!
//! Re-derives the total forwarding overhead from first principles
//! (incorrect plus correct term) and scans every candidate length up to a
//! caller-chosen bound. Used to cross-check the production optimizer.

use crate::fpr_direct;

/// Total forwarding overhead in bits for an `n`-identifier segment with an
/// `m`-bit filter, `k` hashes and payload `c` bits. `None` when the
/// expectation diverges (`p >= 1/3`).
pub fn overhead_bits(n: u64, m: u64, k: u64, c: f64) -> Option<f64> {
    let p = fpr_direct(m, n, k);
    if p >= 1.0 / 3.0 {
        return None;
    }
    let wrong = p / (1.0 - 3.0 * p);
    let ifo = (2 * n + 1) as f64 * (m as f64 + c) * wrong;
    Some(ifo + (m * n) as f64)
}

/// Smallest `m` in `[1, m_max]` minimizing the total overhead, with the
/// minimal value. Ties keep the smaller `m`.
pub fn m_scan(n: u64, k: u64, c: f64, m_max: u64) -> (u64, f64) {
    let mut best: Option<(u64, f64)> = None;
    for m in 1..=m_max {
        if let Some(f) = overhead_bits(n, m, k, c) {
            match best {
                Some((_, bf)) if bf <= f => {}
                _ => best = Some((m, f)),
            }
        }
    }
    best.expect("no feasible m in range")
}
