//! The in-packet Bloom filter and its false-positive model.
//!
//! An `m`-bit vector plus `k` hash positions per element. Inserting a link
//! identifier sets its `k` positions; a query reports positive only when all
//! `k` positions are set, so encoded identifiers are never missed and the
//! only error mode is a false positive.

use crate::rng::mix;

/// Globally unique identifier of one unidirectional inter-satellite link.
/// The two directions of a physical link carry two distinct values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LinkId(pub u32);

impl std::fmt::Display for LinkId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#04x}", self.0)
    }
}

/// `m`-bit filter with `k` distinct hashed positions per element. The seed
/// keys the hash chain so runs are reproducible and distinct packets can
/// use distinct hash instances.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BloomFilter {
    bits: Vec<u64>,
    m: u32,
    k: u32,
    seed: u64,
}

impl BloomFilter {
    pub fn new(m: u32, k: u32, seed: u64) -> Self {
        assert!(m >= 1, "filter length must be at least one bit");
        assert!((1..=64).contains(&k), "hash count must be in 1..=64");
        BloomFilter {
            bits: vec![0; (m as usize).div_ceil(64)],
            m,
            k,
            seed,
        }
    }

    pub fn len_bits(&self) -> u32 {
        self.m
    }

    pub fn hash_count(&self) -> u32 {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The element's `k` distinct positions, drawn from a per-element
    /// seeded hash chain with rejection of repeats. At packet-scale
    /// lengths the position sets must not share structure across elements:
    /// double-hashing-style arithmetic progressions form so few distinct
    /// sets that whole-set collisions dominate the false-positive rate.
    #[inline]
    fn positions(&self, id: LinkId, out: &mut [u32; 64]) -> usize {
        let mut state = mix(&[self.seed, id.0 as u64]);
        let m = self.m as u64;
        let k = (self.k as usize).min(self.m as usize);
        let mut n = 0;
        while n < k {
            let pos = (crate::rng::splitmix64(&mut state) % m) as u32;
            if !out[..n].contains(&pos) {
                out[n] = pos;
                n += 1;
            }
        }
        n
    }

    pub fn insert(&mut self, id: LinkId) {
        let mut buf = [0u32; 64];
        let n = self.positions(id, &mut buf);
        for &pos in &buf[..n] {
            self.bits[pos as usize / 64] |= 1 << (pos % 64);
        }
    }

    pub fn query(&self, id: LinkId) -> bool {
        let mut buf = [0u32; 64];
        let n = self.positions(id, &mut buf);
        buf[..n]
            .iter()
            .all(|&pos| self.bits[pos as usize / 64] & (1 << (pos % 64)) != 0)
    }

    /// Back to all-zero; length, hash count and seed are kept.
    pub fn clear(&mut self) {
        self.bits.fill(0);
    }

    pub fn popcount(&self) -> u32 {
        self.bits.iter().map(|w| w.count_ones()).sum()
    }

    /// Header bits, most-significant bit of the first word first.
    pub fn to_wire_bits(&self) -> Vec<bool> {
        (0..self.m)
            .map(|i| self.bits[i as usize / 64] & (1 << (i % 64)) != 0)
            .collect()
    }
}

/// Classic false-positive rate of an `m`-bit filter holding `n` elements
/// under `k` hashes: `[1 - (1 - 1/m)^(k n)]^k`.
pub fn fpr(m: u32, n: u32, k: u32) -> f64 {
    assert!(m >= 1, "false-positive rate undefined for m = 0");
    if n == 0 {
        return 0.0;
    }
    let miss = (1.0 - 1.0 / m as f64).powi((k * n) as i32);
    (1.0 - miss).powi(k as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(vals: &[u32]) -> Vec<LinkId> {
        vals.iter().copied().map(LinkId).collect()
    }

    #[test]
    fn insert_sets_at_most_k_bits() {
        let mut bf = BloomFilter::new(32, 5, 7);
        bf.insert(LinkId(0x01));
        let pc = bf.popcount();
        assert!((1..=5).contains(&pc), "{pc}");
    }

    #[test]
    fn insert_is_idempotent() {
        let mut bf = BloomFilter::new(32, 5, 7);
        bf.insert(LinkId(42));
        let once = bf.clone();
        bf.insert(LinkId(42));
        assert_eq!(bf, once);
    }

    #[test]
    fn four_identifiers_query_positive() {
        // the worked example: a path of four link identifiers in one filter
        let mut bf = BloomFilter::new(32, 5, 1);
        for id in ids(&[0x01, 0x05, 0x10, 0x13]) {
            bf.insert(id);
        }
        for id in ids(&[0x01, 0x05, 0x10, 0x13]) {
            assert!(bf.query(id));
        }
    }

    #[test]
    fn empty_filter_answers_negative() {
        let bf = BloomFilter::new(32, 5, 3);
        for v in 0..1000 {
            assert!(!bf.query(LinkId(v)));
        }
    }

    #[test]
    fn clear_resets_and_reinsert_is_deterministic() {
        let mut bf = BloomFilter::new(32, 5, 11);
        bf.insert(LinkId(9));
        let single = bf.clone();
        bf.insert(LinkId(77));
        bf.clear();
        assert_eq!(bf.popcount(), 0);
        for v in 0..500 {
            assert!(!bf.query(LinkId(v)));
        }
        bf.insert(LinkId(9));
        assert_eq!(bf, single);
    }

    #[test]
    fn popcount_never_decreases_under_insert() {
        let mut bf = BloomFilter::new(64, 5, 2);
        let mut last = 0;
        for v in 0..100 {
            bf.insert(LinkId(v));
            let pc = bf.popcount();
            assert!(pc >= last);
            last = pc;
        }
    }

    #[test]
    fn fpr_matches_frozen_direct_evaluation() {
        // golden constants computed by direct evaluation of the formula
        assert!((fpr(32, 4, 5) - 0.022946877099).abs() < 1e-9);
        assert!((fpr(20, 4, 5) - 0.108650306444).abs() < 1e-9);
        assert!((fpr(32, 1, 5) - 6.814054578516e-5).abs() < 1e-12);
        assert_eq!(fpr(32, 0, 5), 0.0);
    }

    #[test]
    fn fpr_strictly_decreasing_in_m() {
        for n in [1u32, 4, 8, 12] {
            for m in 16..200 {
                assert!(fpr(m + 1, n, 5) < fpr(m, n, 5), "m={m} n={n}");
            }
        }
    }

    #[test]
    fn wire_bits_roundtrip_popcount() {
        let mut bf = BloomFilter::new(40, 5, 5);
        bf.insert(LinkId(3));
        bf.insert(LinkId(8));
        let wire = bf.to_wire_bits();
        assert_eq!(wire.len(), 40);
        assert_eq!(wire.iter().filter(|&&b| b).count() as u32, bf.popcount());
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            // no false negatives, ever
            #[test]
            fn inserted_ids_always_query_positive(
                ids in proptest::collection::vec(0u32..10_000, 1..24),
                m in 8u32..256,
                seed in 0u64..1_000,
            ) {
                let mut bf = BloomFilter::new(m, 5, seed);
                for &v in &ids {
                    bf.insert(LinkId(v));
                }
                for &v in &ids {
                    prop_assert!(bf.query(LinkId(v)));
                }
            }

            // same seed and insert sequence -> bit-identical filters
            #[test]
            fn construction_is_deterministic(
                ids in proptest::collection::vec(0u32..10_000, 0..24),
                seed in 0u64..1_000,
            ) {
                let mut a = BloomFilter::new(64, 5, seed);
                let mut b = BloomFilter::new(64, 5, seed);
                for &v in &ids {
                    a.insert(LinkId(v));
                    b.insert(LinkId(v));
                }
                prop_assert_eq!(a, b);
            }
        }
    }

    /// Monte-Carlo check of the analytic rate at the worked-example point.
    /// Each trial builds a fresh filter over four random members and queries
    /// one random non-member, so trials are independent Bernoulli draws.
    #[test]
    fn empirical_fpr_near_formula_at_m32() {
        let mut rng = crate::rng::Rng::seeded(0x5eed);
        let trials = 100_000u32;
        let mut hits = 0u32;
        for t in 0..trials {
            let mut bf = BloomFilter::new(32, 5, mix(&[0xb10f, t as u64]));
            let members: Vec<u32> = (0..4).map(|_| rng.below(1 << 30) as u32).collect();
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
        let p_hat = hits as f64 / trials as f64;
        let p = fpr(32, 4, 5);
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        assert!(
            (p_hat - p).abs() <= 3.0 * sigma,
            "p_hat={p_hat:.5} p={p:.5} dev={:.2} sigma",
            (p_hat - p).abs() / sigma
        );
    }
}
