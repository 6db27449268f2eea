//! Breadth-first-search hop counts on an independently constructed
//! polar-grid torus. Shares nothing with the main topology code.

use std::collections::VecDeque;

/// Hop distance between `(o1, s1)` and `(o2, s2)` on a `p x s` grid.
/// `seam` removes the inter-orbit wrap between the last and first orbit.
pub fn bfs_hops(p: u16, s: u16, from: (u16, u16), to: (u16, u16), seam: bool) -> Option<u32> {
    let n = p as usize * s as usize;
    let idx = |o: u16, sl: u16| o as usize * s as usize + sl as usize;
    let mut dist = vec![u32::MAX; n];
    let mut q = VecDeque::new();
    dist[idx(from.0, from.1)] = 0;
    q.push_back(from);
    while let Some((o, sl)) = q.pop_front() {
        let d = dist[idx(o, sl)];
        if (o, sl) == to {
            return Some(d);
        }
        let mut push = |no: u16, ns: u16| {
            if dist[idx(no, ns)] == u32::MAX {
                dist[idx(no, ns)] = d + 1;
                q.push_back((no, ns));
            }
        };
        push(o, (sl + 1) % s);
        push(o, (sl + s - 1) % s);
        if !seam || o + 1 < p {
            push((o + 1) % p, sl);
        }
        if !seam || o > 0 {
            push((o + p - 1) % p, sl);
        }
    }
    None
}

/// Min-wrap Manhattan distance on the full torus (closed form the BFS
/// result is expected to equal when no seam is present).
pub fn torus_manhattan(p: u16, s: u16, from: (u16, u16), to: (u16, u16)) -> u32 {
    let d_o = (from.0 as i32 - to.0 as i32).unsigned_abs();
    let d_s = (from.1 as i32 - to.1 as i32).unsigned_abs();
    d_o.min(p as u32 - d_o) + d_s.min(s as u32 - d_s)
}
