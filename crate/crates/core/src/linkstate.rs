//! Link-failure management building blocks.
//!
//! Three schemes share these pieces:
//!
//! * announcement flooding (LSA): every satellite owns a believed up/down
//!   view of the whole constellation, refreshed by sequence-numbered
//!   floods; only its own links are guaranteed current;
//! * on-demand rerouting (ODR): nothing is disseminated, the satellite in
//!   front of a failed link recomputes the remaining route and re-encodes;
//! * on-demand detouring (ODD): nothing is disseminated either, the failed
//!   link's own identifier names a precomputed three-hop equivalent path,
//!   carried in a second small filter and resolved hop by hop via
//!   per-satellite tables.

use std::collections::BTreeMap;

use crate::bloom::LinkId;
use crate::constellation::{Constellation, Direction, SatId};

/// The three-hop grid detour around one link, clockwise by convention:
/// turn towards the higher-numbered parallel lane, run one step, turn back.
pub fn clockwise_detour(c: &Constellation, id: LinkId) -> Option<[LinkId; 3]> {
    detour(c, id, false)
}

/// Mirror image of [`clockwise_detour`].
pub fn counterclockwise_detour(c: &Constellation, id: LinkId) -> Option<[LinkId; 3]> {
    detour(c, id, true)
}

fn detour(c: &Constellation, id: LinkId, mirror: bool) -> Option<[LinkId; 3]> {
    use Direction::*;
    let link = c.link(id);
    let u = link.src;
    // (sidestep out, parallel run, sidestep back), as direction triples
    let (d1, d2, d3) = match (link.dir, mirror) {
        (IntraFwd, false) => (InterNext, IntraFwd, InterPrev),
        (IntraFwd, true) => (InterPrev, IntraFwd, InterNext),
        (IntraBack, false) => (InterPrev, IntraBack, InterNext),
        (IntraBack, true) => (InterNext, IntraBack, InterPrev),
        (InterNext, false) => (IntraFwd, InterNext, IntraBack),
        (InterNext, true) => (IntraBack, InterNext, IntraFwd),
        (InterPrev, false) => (IntraBack, InterPrev, IntraFwd),
        (InterPrev, true) => (IntraFwd, InterPrev, IntraBack),
    };
    let l1 = c.out_link(u, d1)?;
    let m1 = c.link(l1).dst;
    let l2 = c.out_link(m1, d2)?;
    let m2 = c.link(l2).dst;
    let l3 = c.out_link(m2, d3)?;
    debug_assert_eq!(c.link(l3).dst, link.dst);
    Some([l1, l2, l3])
}

/// Per-satellite map from a failed link identifier to the local outgoing
/// interface of its equivalent path. A satellite has an entry exactly when
/// the detour of that link leaves from it.
#[derive(Clone, Debug)]
pub struct EquivalentPathTables {
    cw: Vec<BTreeMap<LinkId, LinkId>>,
    ccw: Vec<BTreeMap<LinkId, LinkId>>,
}

impl EquivalentPathTables {
    pub fn build(c: &Constellation) -> Self {
        let mut cw = vec![BTreeMap::new(); c.num_sats()];
        let mut ccw = vec![BTreeMap::new(); c.num_sats()];
        for link in c.links() {
            if let Some(hops) = clockwise_detour(c, link.id) {
                for h in hops {
                    cw[c.link(h).src.0 as usize].insert(link.id, h);
                }
            }
            if let Some(hops) = counterclockwise_detour(c, link.id) {
                for h in hops {
                    ccw[c.link(h).src.0 as usize].insert(link.id, h);
                }
            }
        }
        EquivalentPathTables { cw, ccw }
    }

    pub fn clockwise(&self, sat: SatId) -> &BTreeMap<LinkId, LinkId> {
        &self.cw[sat.0 as usize]
    }

    pub fn counterclockwise(&self, sat: SatId) -> &BTreeMap<LinkId, LinkId> {
        &self.ccw[sat.0 as usize]
    }
}

/// One satellite's believed link states under announcement flooding.
/// Local links mirror the ground truth; everything else is as fresh as the
/// last flood that reached us.
#[derive(Clone, Debug)]
pub struct LinkStateView {
    up: Vec<bool>,
    /// newest sequence number seen per originating satellite
    seq_seen: Vec<u32>,
    /// bumped whenever the believed map changes (route-cache invalidation)
    pub version: u64,
}

/// One flooded announcement: the origin's own outgoing links and their
/// states.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Announcement {
    pub origin: SatId,
    pub seq: u32,
    pub states: Vec<(LinkId, bool)>,
}

impl LinkStateView {
    pub fn all_up(c: &Constellation) -> Self {
        LinkStateView {
            up: vec![true; c.num_links()],
            seq_seen: vec![0; c.num_sats()],
            version: 0,
        }
    }

    pub fn believes_up(&self, id: LinkId) -> bool {
        self.up[(id.0 - 1) as usize]
    }

    /// Direct observation of a local link (both directions of the
    /// physical pair).
    pub fn observe_local(&mut self, c: &Constellation, id: LinkId, up: bool) {
        for l in [id, c.reverse(id)] {
            if self.up[(l.0 - 1) as usize] != up {
                self.up[(l.0 - 1) as usize] = up;
                self.version += 1;
            }
        }
    }

    /// Applies a flooded announcement. Returns false when the sequence
    /// number was already processed (the duplicate is suppressed).
    pub fn apply(&mut self, c: &Constellation, ann: &Announcement) -> bool {
        let slot = &mut self.seq_seen[ann.origin.0 as usize];
        if ann.seq <= *slot {
            return false;
        }
        *slot = ann.seq;
        for &(id, up) in &ann.states {
            self.observe_local(c, id, up);
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::LinkStateTable;

    fn iridium() -> Constellation {
        Constellation::build(6, 11, 780.0, false).unwrap()
    }

    #[test]
    fn detour_matches_worked_example() {
        // failed inter-orbit link (1,0)->(2,0): detour runs one slot along
        // the orbit, crosses, and comes back
        let c = iridium();
        let failed = c.out_link(c.sat(1, 0), Direction::InterNext).unwrap();
        let hops = clockwise_detour(&c, failed).unwrap();
        assert_eq!(c.link(hops[0]).dst, c.sat(1, 1));
        assert_eq!(c.link(hops[1]).dst, c.sat(2, 1));
        assert_eq!(c.link(hops[2]).dst, c.sat(2, 0));
        // the middle satellite maps the failed identifier to its own
        // crossing interface
        let tables = EquivalentPathTables::build(&c);
        assert_eq!(tables.clockwise(c.sat(1, 1)).get(&failed), Some(&hops[1]));
    }

    #[test]
    fn every_link_has_a_complete_three_hop_detour() {
        let c = iridium();
        for link in c.links() {
            for variant in [
                clockwise_detour(&c, link.id),
                counterclockwise_detour(&c, link.id),
            ] {
                let hops = variant.unwrap();
                assert_eq!(c.link(hops[0]).src, link.src);
                assert_eq!(c.link(hops[2]).dst, link.dst);
                assert_eq!(c.link(hops[0]).dst, c.link(hops[1]).src);
                assert_eq!(c.link(hops[1]).dst, c.link(hops[2]).src);
                for h in hops {
                    assert_ne!(h, link.id, "detour must bypass the failed link");
                }
            }
        }
    }

    #[test]
    fn tables_cover_every_detour_node() {
        let c = iridium();
        let tables = EquivalentPathTables::build(&c);
        for link in c.links() {
            let hops = clockwise_detour(&c, link.id).unwrap();
            for h in hops {
                assert_eq!(tables.clockwise(c.link(h).src).get(&link.id), Some(&h));
            }
            // the far endpoint carries no entry: reaching it ends the detour
            assert!(!tables.clockwise(c.link(link.id).dst).contains_key(&link.id));
        }
    }

    #[test]
    fn announcements_update_views_and_suppress_duplicates() {
        let c = iridium();
        let mut truth = LinkStateTable::new(&c);
        let mut view = LinkStateView::all_up(&c);
        let failed = LinkId(47);
        truth.set_physical(&c, failed, false, 1);
        let ann = Announcement {
            origin: c.link(failed).src,
            seq: 1,
            states: vec![(failed, false)],
        };
        assert!(view.apply(&c, &ann));
        assert!(!view.believes_up(failed));
        assert!(!view.believes_up(c.reverse(failed)));
        // replay of an old sequence number is ignored
        let v = view.version;
        assert!(!view.apply(&c, &ann));
        assert_eq!(view.version, v);
    }

    #[test]
    fn converged_views_equal_ground_truth() {
        let c = iridium();
        let mut truth = LinkStateTable::new(&c);
        for id in [LinkId(5), LinkId(100), LinkId(200)] {
            truth.set_physical(&c, id, false, 1);
        }
        let mut view = LinkStateView::all_up(&c);
        // one full dissemination round: every satellite's announcement
        for sat in 0..c.num_sats() as u16 {
            let origin = SatId(sat);
            let states: Vec<(LinkId, bool)> = c
                .neighbors_out(origin)
                .map(|(l, _)| (l, truth.is_up(l)))
                .collect();
            view.apply(
                &c,
                &Announcement {
                    origin,
                    seq: 1,
                    states,
                },
            );
        }
        for l in c.links() {
            assert_eq!(view.believes_up(l.id), truth.is_up(l.id));
        }
    }
}
