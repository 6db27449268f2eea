//! Prints the reference constants that the unit tests freeze as literals.
//! Run with `cargo run -p lir-oracles --bin goldens`.

use lir_oracles::graph::bfs_hops;
use lir_oracles::policy::min_policy_cost;
use lir_oracles::scan::{m_scan, overhead_bits};
use lir_oracles::{branching::branching_mc, fpr_direct};

fn main() {
    println!("fpr(32,4,5)  = {:.12}", fpr_direct(32, 4, 5));
    println!("fpr(32,1,5)  = {:.12e}", fpr_direct(32, 1, 5));
    println!("fpr(20,4,5)  = {:.12}", fpr_direct(20, 4, 5));
    println!("fpr(30,4,5)  = {:.12}", fpr_direct(30, 4, 5));
    println!("fpr(50,4,5)  = {:.12e}", fpr_direct(50, 4, 5));

    // chord between intra-orbit neighbors, 780 km altitude, 11 per orbit
    let r = 6371.0 + 780.0;
    let chord = 2.0 * r * (std::f64::consts::PI / 11.0).sin();
    println!("intra_delay  = {:.12e} s", chord / 299_792.458);

    // incorrect-forwarding overhead at n=4, m=32, k=5, c=8192
    let p = fpr_direct(32, 4, 5);
    let e = p / (1.0 - 3.0 * p);
    println!("E(p32)       = {:.12}", e);
    println!("f_ifo(4,32)  = {:.9} bits", 9.0 * (32.0 + 8192.0) * e);

    // explicit-link-representation goldens
    let l: u64 = 4 * 4408 * 4;
    let bits_per_id = (l as f64).log2().ceil() as u64;
    println!("elr bits/id(l={l}) = {bits_per_id}");
    println!("elr header(n=10)   = {}", 10 * bits_per_id);
    println!("elr total(n=10)    = {}", 100 * bits_per_id);
    println!("elr bits/id(l=264) = {}", (264f64).log2().ceil() as u64);

    // optimal-length curve at the default parameters, k=5, c=8192 bits
    println!("-- f(n) via exhaustive scan, k=5, c=8192 --");
    let mut f_bits = vec![0.0];
    for n in 1..=12u64 {
        let (m, f) = m_scan(n, 5, 8192.0, 20_000);
        println!("f({n:2}) m*={m:4}  f={f:.6} bits");
        f_bits.push(f);
    }

    // temporal overhead of the two-segment example policy (6 then 3)
    let b = 10.0e6;
    let tau = 10.0e-6;
    let ex1 = (f_bits[6] + f_bits[3]) / b + 2.0 * tau;
    println!("example1 cost      = {ex1:.12e} s");
    let src9 = f_bits[9] / b + tau;
    println!("source(9) cost     = {src9:.12e} s");
    for n in [1usize, 4, 9, 12] {
        let (x, c) = min_policy_cost(n, &f_bits[..=n], b, tau);
        let segs: Vec<usize> = (0..n)
            .filter(|&i| x[i])
            .map(|i| (i + 1..).find(|&j| x[j]).unwrap() - i)
            .collect();
        println!("H({n:2}) = {c:.12e} s  segments {segs:?}");
    }

    let p_q = 0.25;
    println!("E(0.25)            = {:.12}", p_q / (1.0 - 3.0 * p_q));
    println!(
        "branch_mc(0.25,1)  = {:.6}",
        branching_mc(0.25, 1, 2_000_000, 64, 99)
    );

    println!(
        "bfs 6x11 (0,0)->(3,5) = {}",
        bfs_hops(6, 11, (0, 0), (3, 5), false).unwrap()
    );
    // the small grids used by forwarding tests
    println!(
        "bfs 6x11 (0,0)->(1,2) = {}",
        bfs_hops(6, 11, (0, 0), (1, 2), false).unwrap()
    );
    println!(
        "overhead(2,42)     = {:?} bits",
        overhead_bits(2, 42, 5, 8192.0)
    );
}
