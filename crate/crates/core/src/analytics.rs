//! Closed-form forwarding-overhead model.
//!
//! A false positive sends the packet down a wrong direction where the same
//! thing can happen again, so the expected extra hops per potential wrong
//! direction are `E(p) = p / (1 - 3p)` — finite only while `p < 1/3`. An
//! `n`-hop delivery exposes `2n + 1` wrong directions (three at the source,
//! two at each intermediate), each wrong hop wasting the header plus the
//! payload. Growing the filter reduces the incorrect term but inflates the
//! header carried along the correct path; the optimizer picks the length
//! balancing the two.

use crate::bloom::fpr;

/// Validity limit of the expectation: beyond it the branching diverges.
pub const DIVERGENCE_P: f64 = 1.0 / 3.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OverheadParams {
    /// effective payload per packet, in bits
    pub payload_bits: f64,
    /// hash positions per identifier
    pub hash_count: u32,
    /// link bandwidth, bits per second
    pub bandwidth_bps: f64,
    /// processing delay charged per re-encoding, seconds
    pub reencode_delay_s: f64,
}

impl Default for OverheadParams {
    fn default() -> Self {
        OverheadParams {
            payload_bits: 8192.0,
            hash_count: 5,
            bandwidth_bps: 10.0e6,
            reencode_delay_s: 10.0e-6,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AnalyticsError {
    /// `p >= 1/3`: the expected wrong-hop count is infinite.
    Divergent,
    /// probability outside `[0, 1]`
    BadProbability,
}

impl std::fmt::Display for AnalyticsError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AnalyticsError::Divergent => {
                write!(f, "false-positive rate >= 1/3, expectation diverges")
            }
            AnalyticsError::BadProbability => write!(f, "probability outside [0, 1]"),
        }
    }
}

impl std::error::Error for AnalyticsError {}

/// Expected hops wasted along a single potential wrong direction.
pub fn expected_wrong_hops(p: f64) -> Result<f64, AnalyticsError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(AnalyticsError::BadProbability);
    }
    if p >= DIVERGENCE_P {
        return Err(AnalyticsError::Divergent);
    }
    Ok(p / (1.0 - 3.0 * p))
}

/// Expected incorrect forwarding overhead in bits for an `n`-identifier
/// segment in an `m`-bit filter.
pub fn incorrect_overhead_bits(
    n: u32,
    m: u32,
    params: &OverheadParams,
) -> Result<f64, AnalyticsError> {
    let p = fpr(m, n, params.hash_count);
    let wrong = expected_wrong_hops(p)?;
    Ok((2 * n + 1) as f64 * (m as f64 + params.payload_bits) * wrong)
}

/// Header bits carried along the intended path: `m * n`.
pub fn correct_overhead_bits(n: u32, m: u32) -> f64 {
    (m as f64) * (n as f64)
}

/// Total forwarding overhead: incorrect plus correct term.
pub fn total_overhead_bits(n: u32, m: u32, params: &OverheadParams) -> Result<f64, AnalyticsError> {
    Ok(incorrect_overhead_bits(n, m, params)? + correct_overhead_bits(n, m))
}

/// Overhead-minimizing filter length for an `n`-identifier segment, with
/// the minimum value in bits. Integer scan from `max(k, 1)` upward with an
/// early exit once the curve has been non-decreasing for `3k` candidates;
/// ties keep the smallest length.
pub fn optimal_bf(n: u32, params: &OverheadParams) -> (u32, f64) {
    assert!(n >= 1);
    let k = params.hash_count.max(1);
    let cap = 64 * n * k;
    let mut best: Option<(u32, f64)> = None;
    let mut rising = 0u32;
    let mut last = f64::INFINITY;
    let mut m = k;
    while m <= cap {
        if let Ok(f) = total_overhead_bits(n, m, params) {
            if best.is_none_or(|(_, bf)| f < bf) {
                best = Some((m, f));
            }
            if f >= last {
                rising += 1;
                if rising >= 3 * k && best.is_some() {
                    break;
                }
            } else {
                rising = 0;
            }
            last = f;
        }
        m += 1;
    }
    best.expect("a feasible filter length always exists below the cap")
}

/// Forwarding-overhead curve `f(1..=n_max)`, memoized for the dynamic
/// program. `m[n]` is the filter length behind `f[n]`.
#[derive(Clone, Debug)]
pub struct OverheadCurve {
    f_bits: Vec<f64>,
    m_bits: Vec<u32>,
}

impl OverheadCurve {
    /// Curve under the per-segment optimal filter length.
    pub fn optimal(n_max: u32, params: &OverheadParams) -> Self {
        let mut f_bits = vec![0.0];
        let mut m_bits = vec![0];
        for n in 1..=n_max {
            let (m, f) = optimal_bf(n, params);
            f_bits.push(f);
            m_bits.push(m);
        }
        OverheadCurve { f_bits, m_bits }
    }

    /// Curve under one fixed filter length. Segments whose expectation
    /// diverges get infinite cost, so the optimizer avoids them.
    pub fn fixed(n_max: u32, m: u32, params: &OverheadParams) -> Self {
        let mut f_bits = vec![0.0];
        let mut m_bits = vec![0];
        for n in 1..=n_max {
            f_bits.push(total_overhead_bits(n, m, params).unwrap_or(f64::INFINITY));
            m_bits.push(m);
        }
        OverheadCurve { f_bits, m_bits }
    }

    pub fn max_hops(&self) -> u32 {
        (self.f_bits.len() - 1) as u32
    }

    /// `f(n)` in bits.
    pub fn f(&self, n: u32) -> f64 {
        self.f_bits[n as usize]
    }

    /// Filter length used for an `n`-identifier segment.
    pub fn m(&self, n: u32) -> u32 {
        self.m_bits[n as usize]
    }
}

/// Explicit-link-representation baseline: header and total forwarding
/// overhead of listing `n` identifiers of `ceil(log2(l))` bits each.
pub fn elr_overhead(n: u32, l: u64) -> (u64, u64) {
    let bits = elr_bits_per_id(l);
    (n as u64 * bits, (n as u64) * (n as u64) * bits)
}

/// Minimal bits to name one of `l` links.
pub fn elr_bits_per_id(l: u64) -> u64 {
    assert!(l >= 2);
    (64 - (l - 1).leading_zeros()) as u64
}

/// Smallest filter length whose analytic rate meets `target` for `n`
/// identifiers under `k` hashes.
pub fn min_m_for_fpr(n: u32, k: u32, target: f64) -> u32 {
    let mut m = k.max(1);
    while fpr(m, n, k) > target {
        m += 1;
    }
    m
}
