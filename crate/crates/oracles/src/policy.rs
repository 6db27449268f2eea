//! Exhaustive enumeration of segment-encoding policies.
//!
//! A policy over an `n`-hop delivery is a bit vector of length `n + 1` with
//! the first and last bit fixed to 1, so there are `2^(n-1)` of them.

/// All members of the policy set for `n` hops. Bit `i` of each vector is the
/// decision of node `i + 1` (1-based nodes as in the temporal-cost model).
pub fn enumerate_policies(n: usize) -> Vec<Vec<bool>> {
    assert!(n >= 1);
    let free = n - 1; // nodes 2..=n
    let mut out = Vec::with_capacity(1 << free);
    for mask in 0u64..(1u64 << free) {
        let mut x = vec![false; n + 1];
        x[0] = true;
        x[n] = true;
        for (b, slot) in x.iter_mut().enumerate().take(n).skip(1) {
            *slot = (mask >> (b - 1)) & 1 == 1;
        }
        out.push(x);
    }
    out
}

/// Temporal cost of one policy, by direct scan: every encoding node `i`
/// pays `f(len)/b + tau` where `len` is the gap to the next encoding node.
/// `f_bits[len]` is the forwarding overhead of a `len`-identifier segment.
pub fn policy_cost(x: &[bool], f_bits: &[f64], b: f64, tau: f64) -> f64 {
    let n = x.len() - 1;
    let mut cost = 0.0;
    for i in 0..n {
        if x[i] {
            let mut j = i + 1;
            while !x[j] {
                j += 1;
            }
            cost += f_bits[j - i] / b + tau;
        }
    }
    cost
}

/// Exact minimum over the whole policy set.
pub fn min_policy_cost(n: usize, f_bits: &[f64], b: f64, tau: f64) -> (Vec<bool>, f64) {
    assert!(n <= 24, "enumeration limited to 2^23 policies");
    let mut best: Option<(Vec<bool>, f64)> = None;
    for x in enumerate_policies(n) {
        let c = policy_cost(&x, f_bits, b, tau);
        match &best {
            Some((_, bc)) if *bc <= c => {}
            _ => best = Some((x, c)),
        }
    }
    best.unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_match_2_pow_n_minus_1() {
        assert_eq!(enumerate_policies(1).len(), 1);
        assert_eq!(enumerate_policies(3).len(), 4);
        assert_eq!(enumerate_policies(9).len(), 256);
        for x in enumerate_policies(9) {
            assert!(x[0] && x[9]);
        }
    }

    #[test]
    fn single_hop_cost() {
        // f(1) = 10 bits, b = 10 bit/s, tau = 1 -> 2.0
        let f = [0.0, 10.0];
        let (x, c) = min_policy_cost(1, &f, 10.0, 1.0);
        assert_eq!(x, vec![true, true]);
        assert!((c - 2.0).abs() < 1e-12);
    }
}
