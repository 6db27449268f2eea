//! Polar-grid constellation: satellites, link identifiers, and geometry.
//!
//! `P` orbit planes of `S` satellites each. Every satellite keeps four
//! outgoing links: forward/backward inside its orbit and towards the next /
//! previous plane. With the optional seam, the wrap between the last and
//! first plane is removed and seam-column satellites keep three links.
//!
//! Unidirectional link identifiers are assigned densely from 1 in satellite
//! order, direction order `[intra-fwd, intra-back, inter-next, inter-prev]`.
//! Intra-orbit links therefore carry lower identifiers than inter-orbit
//! links at the same satellite, which the deterministic routing tie-break
//! (lowest identifier) turns into "along the orbit first".

use crate::bloom::LinkId;

pub const EARTH_RADIUS_KM: f64 = 6371.0;
pub const LIGHT_SPEED_KM_S: f64 = 299_792.458;
const DEFAULT_INCLINATION_DEG: f64 = 86.4;

/// Satellite index: `orbit * sats_per_orbit + slot`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SatId(pub u16);

/// Outgoing direction slots of one satellite.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    IntraFwd = 0,
    IntraBack = 1,
    InterNext = 2,
    InterPrev = 3,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::IntraFwd,
        Direction::IntraBack,
        Direction::InterNext,
        Direction::InterPrev,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Direction::IntraFwd => "intra-fwd",
            Direction::IntraBack => "intra-back",
            Direction::InterNext => "inter-next",
            Direction::InterPrev => "inter-prev",
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Link {
    pub id: LinkId,
    pub src: SatId,
    pub dst: SatId,
    pub dir: Direction,
}

#[derive(Debug, PartialEq, Eq)]
pub enum BuildError {
    TooFewOrbits,
    TooFewSlots,
}

impl std::fmt::Display for BuildError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BuildError::TooFewOrbits => write!(f, "need at least 2 orbits"),
            BuildError::TooFewSlots => write!(f, "need at least 3 satellites per orbit"),
        }
    }
}

impl std::error::Error for BuildError {}

#[derive(Clone, Debug)]
pub struct Constellation {
    orbits: u16,
    per_orbit: u16,
    altitude_km: f64,
    inclination_deg: f64,
    seam: bool,
    links: Vec<Link>,
    /// per satellite, indexed by `Direction`
    out: Vec<[Option<LinkId>; 4]>,
}

impl Constellation {
    pub fn build(
        orbits: u16,
        per_orbit: u16,
        altitude_km: f64,
        seam: bool,
    ) -> Result<Self, BuildError> {
        if orbits < 2 {
            return Err(BuildError::TooFewOrbits);
        }
        if per_orbit < 3 {
            return Err(BuildError::TooFewSlots);
        }
        let n = orbits as usize * per_orbit as usize;
        let mut c = Constellation {
            orbits,
            per_orbit,
            altitude_km,
            inclination_deg: DEFAULT_INCLINATION_DEG,
            seam,
            links: Vec::with_capacity(4 * n),
            out: vec![[None; 4]; n],
        };
        let mut next = 1u32;
        for o in 0..orbits {
            for s in 0..per_orbit {
                let src = c.sat(o, s);
                for dir in Direction::ALL {
                    let dst = match dir {
                        Direction::IntraFwd => Some(c.sat(o, (s + 1) % per_orbit)),
                        Direction::IntraBack => Some(c.sat(o, (s + per_orbit - 1) % per_orbit)),
                        Direction::InterNext => {
                            (!seam || o + 1 < orbits).then(|| c.sat((o + 1) % orbits, s))
                        }
                        Direction::InterPrev => {
                            (!seam || o > 0).then(|| c.sat((o + orbits - 1) % orbits, s))
                        }
                    };
                    if let Some(dst) = dst {
                        let id = LinkId(next);
                        next += 1;
                        c.links.push(Link { id, src, dst, dir });
                        c.out[src.0 as usize][dir as usize] = Some(id);
                    }
                }
            }
        }
        Ok(c)
    }

    pub fn orbits(&self) -> u16 {
        self.orbits
    }

    pub fn per_orbit(&self) -> u16 {
        self.per_orbit
    }

    pub fn seam(&self) -> bool {
        self.seam
    }

    pub fn altitude_km(&self) -> f64 {
        self.altitude_km
    }

    pub fn num_sats(&self) -> usize {
        self.orbits as usize * self.per_orbit as usize
    }

    pub fn num_links(&self) -> usize {
        self.links.len()
    }

    pub fn sat(&self, orbit: u16, slot: u16) -> SatId {
        debug_assert!(orbit < self.orbits && slot < self.per_orbit);
        SatId(orbit * self.per_orbit + slot)
    }

    pub fn orbit_slot(&self, sat: SatId) -> (u16, u16) {
        (sat.0 / self.per_orbit, sat.0 % self.per_orbit)
    }

    pub fn link(&self, id: LinkId) -> &Link {
        &self.links[(id.0 - 1) as usize]
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn out_link(&self, sat: SatId, dir: Direction) -> Option<LinkId> {
        self.out[sat.0 as usize][dir as usize]
    }

    /// Outgoing `(link, neighbor)` pairs in direction order.
    pub fn neighbors_out(&self, sat: SatId) -> impl Iterator<Item = (LinkId, SatId)> + '_ {
        self.out[sat.0 as usize]
            .iter()
            .flatten()
            .map(|&id| (id, self.link(id).dst))
    }

    /// The opposite direction of the same physical link.
    pub fn reverse(&self, id: LinkId) -> LinkId {
        let link = self.link(id);
        let back = match link.dir {
            Direction::IntraFwd => Direction::IntraBack,
            Direction::IntraBack => Direction::IntraFwd,
            Direction::InterNext => Direction::InterPrev,
            Direction::InterPrev => Direction::InterNext,
        };
        self.out_link(link.dst, back)
            .expect("torus construction pairs every link")
    }

    /// Canonical identifier of the physical (bidirectional) link.
    pub fn physical(&self, id: LinkId) -> LinkId {
        id.min(self.reverse(id))
    }

    /// Inertial position at simulation time `t` in km.
    pub fn position_km(&self, sat: SatId, t_s: f64) -> [f64; 3] {
        let (o, s) = self.orbit_slot(sat);
        let r = EARTH_RADIUS_KM + self.altitude_km;
        // orbital period from Kepler's third law, mu = 398600.4418 km^3/s^2
        let period = 2.0 * std::f64::consts::PI * (r.powi(3) / 398_600.441_8).sqrt();
        let raan = 2.0 * std::f64::consts::PI * o as f64 / self.orbits as f64;
        let u = 2.0 * std::f64::consts::PI * (s as f64 / self.per_orbit as f64 + t_s / period);
        let inc = self.inclination_deg.to_radians();
        let (sin_u, cos_u) = u.sin_cos();
        let (sin_o, cos_o) = raan.sin_cos();
        let (sin_i, cos_i) = inc.sin_cos();
        [
            r * (cos_o * cos_u - sin_o * sin_u * cos_i),
            r * (sin_o * cos_u + cos_o * sin_u * cos_i),
            r * sin_u * sin_i,
        ]
    }

    /// Straight-line distance over the light speed, in seconds.
    pub fn propagation_delay_s(&self, id: LinkId, t_s: f64) -> f64 {
        let link = self.link(id);
        let a = self.position_km(link.src, t_s);
        let b = self.position_km(link.dst, t_s);
        let d2 = (a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2);
        d2.sqrt() / LIGHT_SPEED_KM_S
    }

    /// Topology dump, one row per unidirectional link.
    pub fn topology_csv(&self) -> String {
        let mut s = String::from("link_id,src_orbit,src_slot,dst_orbit,dst_slot,direction\n");
        for l in &self.links {
            let (so, ss) = self.orbit_slot(l.src);
            let (to, ts) = self.orbit_slot(l.dst);
            s.push_str(&format!("{},{so},{ss},{to},{ts},{}\n", l.id.0, l.dir.tag()));
        }
        s
    }
}

/// Up/down state per unidirectional link, mutated only by the event loop.
/// Both directions of a physical link change together.
#[derive(Clone, Debug)]
pub struct LinkStateTable {
    up: Vec<bool>,
    last_change_ns: Vec<u64>,
}

impl LinkStateTable {
    pub fn new(c: &Constellation) -> Self {
        LinkStateTable {
            up: vec![true; c.num_links()],
            last_change_ns: vec![0; c.num_links()],
        }
    }

    pub fn is_up(&self, id: LinkId) -> bool {
        self.up[(id.0 - 1) as usize]
    }

    pub fn last_change_ns(&self, id: LinkId) -> u64 {
        self.last_change_ns[(id.0 - 1) as usize]
    }

    /// Fails or restores the physical link behind `id` (both directions).
    pub fn set_physical(&mut self, c: &Constellation, id: LinkId, up: bool, t_ns: u64) {
        for l in [id, c.reverse(id)] {
            self.up[(l.0 - 1) as usize] = up;
            self.last_change_ns[(l.0 - 1) as usize] = t_ns;
        }
    }

    pub fn down_count(&self) -> usize {
        self.up.iter().filter(|u| !**u).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iridium_grid_counts() {
        let c = Constellation::build(6, 11, 780.0, false).unwrap();
        assert_eq!(c.num_sats(), 66);
        assert_eq!(c.num_links(), 264);
        let total_degree: usize = (0..66).map(|i| c.neighbors_out(SatId(i)).count()).sum();
        assert_eq!(total_degree, c.num_links());
    }

    #[test]
    fn smallest_torus_has_degree_four() {
        let c = Constellation::build(2, 3, 780.0, false).unwrap();
        for i in 0..6 {
            assert_eq!(c.neighbors_out(SatId(i)).count(), 4);
        }
    }

    #[test]
    fn seam_columns_have_three_links() {
        let c = Constellation::build(6, 11, 780.0, true).unwrap();
        for s in 0..11 {
            assert_eq!(c.neighbors_out(c.sat(0, s)).count(), 3);
            assert_eq!(c.neighbors_out(c.sat(5, s)).count(), 3);
            assert_eq!(c.neighbors_out(c.sat(2, s)).count(), 4);
        }
        assert_eq!(c.num_links(), 264 - 22);
    }

    #[test]
    fn degenerate_dimensions_rejected() {
        assert_eq!(
            Constellation::build(1, 11, 780.0, false).unwrap_err(),
            BuildError::TooFewOrbits
        );
        assert_eq!(
            Constellation::build(6, 2, 780.0, false).unwrap_err(),
            BuildError::TooFewSlots
        );
    }

    #[test]
    fn reverse_is_an_involution_and_bijection() {
        let c = Constellation::build(6, 11, 780.0, false).unwrap();
        for l in c.links() {
            let r = c.reverse(l.id);
            assert_ne!(r, l.id);
            assert_eq!(c.reverse(r), l.id);
            assert_eq!(c.link(r).src, l.dst);
            assert_eq!(c.link(r).dst, l.src);
        }
    }

    #[test]
    fn intra_orbit_delay_matches_chord_golden() {
        // 2 * (6371 + 780) * sin(pi/11) / c, frozen from direct evaluation
        let c = Constellation::build(6, 11, 780.0, false).unwrap();
        let id = c.out_link(c.sat(0, 0), Direction::IntraFwd).unwrap();
        let d = c.propagation_delay_s(id, 0.0);
        assert!((d - 1.344042827103e-2).abs() < 1e-12, "{d}");
    }

    #[test]
    fn delay_is_symmetric_and_bounded() {
        let c = Constellation::build(6, 11, 780.0, false).unwrap();
        let bound = 2.0 * (EARTH_RADIUS_KM + 780.0) / LIGHT_SPEED_KM_S;
        for l in c.links() {
            let d = c.propagation_delay_s(l.id, 0.0);
            let back = c.propagation_delay_s(c.reverse(l.id), 0.0);
            assert!((d - back).abs() < 1e-15);
            assert!(d > 0.0 && d < bound, "{d}");
        }
    }

    #[test]
    fn link_state_isolation() {
        let c = Constellation::build(6, 11, 780.0, false).unwrap();
        let mut st = LinkStateTable::new(&c);
        let id = LinkId(47);
        st.set_physical(&c, id, false, 5);
        assert!(!st.is_up(id));
        assert!(!st.is_up(c.reverse(id)));
        assert_eq!(st.down_count(), 2);
        for l in c.links() {
            if l.id != id && l.id != c.reverse(id) {
                assert!(st.is_up(l.id));
            }
        }
        st.set_physical(&c, id, true, 9);
        assert_eq!(st.down_count(), 0);
        assert_eq!(st.last_change_ns(id), 9);
    }

    mod properties {
        use lir_oracles::graph::{bfs_hops, torus_manhattan};
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn hop_distance_is_min_wrap_manhattan(
                o1 in 0u16..6, s1 in 0u16..11,
                o2 in 0u16..6, s2 in 0u16..11,
            ) {
                let hops = bfs_hops(6, 11, (o1, s1), (o2, s2), false).unwrap();
                prop_assert_eq!(hops, torus_manhattan(6, 11, (o1, s1), (o2, s2)));
            }
        }
    }
}
