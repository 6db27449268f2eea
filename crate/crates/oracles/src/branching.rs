//! Monte-Carlo simulation of the incorrect-forwarding branching process.
//!
//! Each potential wrong direction fires independently with probability `p`.
//! A fired direction costs one hop and exposes three further wrong
//! directions at the next satellite. No topology is involved; this is the
//! abstract process behind the closed form `E(p) = p / (1 - 3p)`.

use crate::OracleRng;

/// Mean total wrong hops per trial, where each trial starts `directions`
/// independent branching processes. `cap` bounds the depth of any single
/// excursion (mirrors a TTL) so supercritical parameters stay finite.
pub fn branching_mc(p: f64, directions: u32, trials: u64, cap: u32, seed: u64) -> f64 {
    assert!((0.0..=1.0).contains(&p));
    let mut rng = OracleRng::new(seed);
    let mut total = 0u64;
    for _ in 0..trials {
        for _ in 0..directions {
            total += excursion(p, cap, &mut rng);
        }
    }
    total as f64 / trials as f64
}

/// Hops produced by a single potential wrong direction.
fn excursion(p: f64, cap: u32, rng: &mut OracleRng) -> u64 {
    let mut hops = 0u64;
    // stack of (pending direction count at depth), iterative to avoid recursion
    let mut pending: Vec<u32> = vec![1];
    while let Some(slot) = pending.last_mut() {
        if *slot == 0 {
            pending.pop();
            continue;
        }
        *slot -= 1;
        if rng.next_f64() < p {
            hops += 1;
            if (pending.len() as u32) < cap {
                pending.push(3);
            }
        }
    }
    hops
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_probability_never_fires() {
        assert_eq!(branching_mc(0.0, 9, 10_000, 64, 1), 0.0);
    }

    #[test]
    fn matches_closed_form_at_p01() {
        let mean = branching_mc(0.1, 9, 200_000, 64, 42);
        let expect = 9.0 * 0.1 / (1.0 - 0.3);
        assert!((mean - expect).abs() / expect < 0.02, "{mean} vs {expect}");
    }
}
