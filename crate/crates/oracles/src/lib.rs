//! Independent reference implementations used only by test code.
//!
//! Everything in here is deliberately written from scratch against the
//! underlying math, without touching the main crates, so the two sides can
//! disagree when one of them is wrong. Nothing here is performance-tuned.

pub mod branching;
pub mod graph;
pub mod policy;
pub mod scan;

/// Direct evaluation of the classic Bloom-filter false-positive formula
/// `[1 - (1 - 1/m)^(k*n)]^k`.
pub fn fpr_direct(m: u64, n: u64, k: u64) -> f64 {
    assert!(m >= 1, "m must be positive");
    let miss = (1.0 - 1.0 / m as f64).powi((k * n) as i32);
    (1.0 - miss).powi(k as i32)
}

/// Minimal deterministic RNG (xorshift64*), self-contained on purpose.
#[derive(Clone, Debug)]
pub struct OracleRng(u64);

impl OracleRng {
    pub fn new(seed: u64) -> Self {
        OracleRng(seed.wrapping_mul(0x9e3779b97f4a7c15) | 1)
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.0 = x;
        x.wrapping_mul(0x2545f4914f6cdd1d)
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform in `[0, n)`.
    pub fn below(&mut self, n: u64) -> u64 {
        // widening multiply; bias is negligible for the ranges used in tests
        ((self.next_u64() as u128 * n as u128) >> 64) as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fpr_zero_elements() {
        assert_eq!(fpr_direct(32, 0, 5), 0.0);
    }

    #[test]
    fn rng_is_deterministic() {
        let mut a = OracleRng::new(7);
        let mut b = OracleRng::new(7);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }
}
