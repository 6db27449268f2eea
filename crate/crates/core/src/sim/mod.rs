//! Deterministic discrete-event simulator.
//!
//! Single-threaded event loop over integer-nanosecond time. Interfaces are
//! drop-tail FIFO queues serving one transmission at a time at the
//! configured bandwidth; a packet's end-to-end delay decomposes exactly
//! into queuing, transmission, propagation and re-encoding time. One master
//! seed drives purpose-keyed random streams (traffic, failures, packet
//! hashing), so toggling one mechanism never perturbs another, and a
//! repeated run is bit-identical.

pub mod metrics;

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, VecDeque};
use std::rc::Rc;

use crate::analytics::{elr_bits_per_id, OverheadCurve, OverheadParams};
use crate::bloom::{BloomFilter, LinkId};
use crate::constellation::{Constellation, LinkStateTable, SatId};
use crate::encoding::{solve_dp, DpSolution};
use crate::forwarding::{
    compute_route, elr_forward, encode_path, forward_decision, Action, DropReason, ElrHeader,
    HeaderKind, IntendedPath, Packet,
};
use crate::linkstate::{Announcement, EquivalentPathTables, LinkStateView};
use crate::multicast::{choose_primary, node_identified_walk, pnb_tree, spf_tree, tree_nodes};
use crate::rng::{mix, Rng};
use crate::scenario::{BfLength, Management, Mode, Pattern, Scenario};

pub use metrics::{FlowMetrics, LinkMetrics, Metrics, FLOWS_CSV_HEADER, LINKS_CSV_HEADER};

const CTRL_FLOW: u32 = u32::MAX;
const CTRL_BITS: u32 = 160;
/// Per-packet budget of misrouted traversals. A filter realization whose
/// positive set contains whole cycles floods exponentially until the hop
/// limit; this valve bounds the damage of such (rare, beyond-the-model)
/// realizations so runs stay finite. It is far above anything a
/// subcritical excursion reaches.
const JUNK_HOP_BUDGET: u32 = 2_000;
/// hop budget for the structural walks of the node-identified demo
const DEMO_TTL: u16 = 24;

/// Scenario-wide immutable state, shared across seeds of one experiment.
pub struct SimContext {
    pub scn: Scenario,
    pub c: Constellation,
    params: OverheadParams,
    /// sizing/overhead curve under the optimal filter length
    opt_curve: OverheadCurve,
    /// curve the segment optimizer consumes (fixed length when configured)
    dp_curve: OverheadCurve,
    eq_tables: Option<EquivalentPathTables>,
    elr_bits: u32,
}

impl SimContext {
    pub fn new(scn: &Scenario) -> Result<SimContext, String> {
        scn.validate().map_err(|e| e.to_string())?;
        let c = Constellation::build(scn.orbits, scn.sats, scn.altitude_km, scn.seam)
            .map_err(|e| e.to_string())?;
        let params = OverheadParams {
            payload_bits: scn.payload_bits as f64,
            hash_count: scn.bf_k,
            bandwidth_bps: scn.bandwidth_bps,
            reencode_delay_s: scn.tau_s,
        };
        let max_seg = 64;
        let opt_curve = OverheadCurve::optimal(max_seg, &params);
        let dp_curve = match scn.bf_m {
            BfLength::Optimal => opt_curve.clone(),
            BfLength::Fixed(m) => OverheadCurve::fixed(max_seg, m, &params),
        };
        let eq_tables =
            (scn.management == Management::Odd).then(|| EquivalentPathTables::build(&c));
        let elr_bits = elr_bits_per_id(c.num_links() as u64) as u32;
        Ok(SimContext {
            scn: scn.clone(),
            c,
            params,
            opt_curve,
            dp_curve,
            eq_tables,
            elr_bits,
        })
    }

    fn m_for_segment(&self, len: usize) -> u32 {
        match self.scn.bf_m {
            BfLength::Fixed(m) => m,
            BfLength::Optimal => self.opt_curve.m(len.min(64) as u32),
        }
    }

    /// One full run; identical seeds give identical metrics.
    pub fn run(&self, seed: u64) -> Metrics {
        self.run_with_trace(seed, false)
    }

    /// Like [`SimContext::run`], optionally recording one line per packet
    /// delivery or loss.
    pub fn run_with_trace(&self, seed: u64, trace: bool) -> Metrics {
        if self.scn.mode == Mode::NodeDemo {
            return self.run_node_demo(seed);
        }
        let mut run = Run::new(self, seed);
        run.trace = trace;
        run.run()
    }

    /// The node-identified counterexample is a structural walk, not a
    /// queuing simulation: it reports duplicates and loop kills.
    fn run_node_demo(&self, seed: u64) -> Metrics {
        let mut m = Metrics::default();
        for flow in &self.scn.flows {
            let src = self.c.sat(flow.src.0, flow.src.1);
            let dests: Vec<SatId> = flow.dsts.iter().map(|&(o, s)| self.c.sat(o, s)).collect();
            let mut fm = FlowMetrics::default();
            if let Some(tree) = spf_tree(&self.c, src, &dests, |_| true) {
                let nodes = tree_nodes(&self.c, src, &tree);
                let report = node_identified_walk(
                    &self.c,
                    src,
                    &dests,
                    &nodes,
                    2048,
                    self.scn.bf_k,
                    mix(&[seed, 0xd340]),
                    DEMO_TTL,
                );
                fm.sent = 1;
                fm.expected = dests.len() as u64;
                fm.delivered = report.first_copies.iter().map(|&x| x as u64).sum();
                fm.dup_deliveries = report.duplicate_deliveries as u64;
                *fm.drops.entry(DropReason::TtlExpired).or_default() = report.ttl_drops as u64;
                fm.misrouted_hops = report.hops as u64;
            } else {
                *fm.drops.entry(DropReason::NoRoute).or_default() = 1;
                fm.sent = 1;
                fm.expected = dests.len() as u64;
            }
            m.flows.push(fm);
        }
        m
    }
}

#[derive(Debug)]
enum EvKind {
    Emit {
        flow: u32,
        emission: u64,
    },
    Arrive {
        sat: SatId,
        link_in: Option<LinkId>,
        pkt: Box<Packet>,
    },
    TxDone {
        link: LinkId,
    },
    HelloTick,
    Fail {
        phys: LinkId,
    },
    Recover {
        phys: LinkId,
    },
}

#[derive(Debug)]
struct Ev {
    t: u64,
    seq: u64,
    kind: EvKind,
}

impl PartialEq for Ev {
    fn eq(&self, other: &Self) -> bool {
        (self.t, self.seq) == (other.t, other.seq)
    }
}
impl Eq for Ev {}
impl PartialOrd for Ev {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Ev {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.t, self.seq).cmp(&(other.t, other.seq))
    }
}

#[derive(Default)]
struct Iface {
    waiting: VecDeque<(Box<Packet>, u64)>,
    transmitting: Option<Box<Packet>>,
}

struct Run<'a> {
    ctx: &'a SimContext,
    truth: LinkStateTable,
    /// per-satellite believed views (announcement-flooding modes only)
    views: Option<Vec<LinkStateView>>,
    lsa_dirty: Vec<bool>,
    lsa_seq: Vec<u32>,
    queues: Vec<Iface>,
    heap: BinaryHeap<Reverse<Ev>>,
    ev_seq: u64,
    now: u64,
    horizon_ns: u64,
    metrics: Metrics,
    delivered_first: BTreeSet<(u32, u64, u16)>,
    /// duplicate suppression for wandering copies: a given (packet, path
    /// representation) is processed at most once per arrival link, so an
    /// exact replay -- a copy coming around a cycle of false-positive
    /// links -- is dropped instead of re-amplifying every lap until the
    /// hop limit. Distinct wrong directions reaching the same satellite
    /// via different links still both count, and re-encoding mints a new
    /// fingerprint, so replans pass.
    seen_junk: BTreeSet<(u32, u32, u64, u64)>,
    /// per-satellite local-state version, for route-cache invalidation
    local_version: Vec<u64>,
    route_cache: BTreeMap<(u16, u16, u64), Rc<Vec<LinkId>>>,
    dp_memo: BTreeMap<usize, Rc<DpSolution>>,
    mcast_tree: BTreeMap<u32, Rc<IntendedPath>>,
    traffic_rng: Vec<Rng>,
    hash_base: u64,
    uid: u64,
    /// per-flow precomputed propagation delay is looked up per link
    prop_ns: Vec<u64>,
    trace: bool,
}

impl<'a> Run<'a> {
    fn new(ctx: &'a SimContext, seed: u64) -> Run<'a> {
        let scn = &ctx.scn;
        let n_links = ctx.c.num_links();
        let horizon_ns = sec_to_ns(scn.horizon_s);
        let prop_ns: Vec<u64> = (0..n_links)
            .map(|i| sec_to_ns(ctx.c.propagation_delay_s(LinkId(i as u32 + 1), 0.0)))
            .collect();
        let mut run = Run {
            ctx,
            truth: LinkStateTable::new(&ctx.c),
            views: None,
            lsa_dirty: vec![false; ctx.c.num_sats()],
            lsa_seq: vec![0; ctx.c.num_sats()],
            queues: (0..n_links).map(|_| Iface::default()).collect(),
            heap: BinaryHeap::new(),
            ev_seq: 0,
            now: 0,
            horizon_ns,
            metrics: Metrics {
                flows: vec![FlowMetrics::default(); scn.flows.len()],
                ..Metrics::default()
            },
            delivered_first: BTreeSet::new(),
            seen_junk: BTreeSet::new(),
            local_version: vec![0; ctx.c.num_sats()],
            route_cache: BTreeMap::new(),
            dp_memo: BTreeMap::new(),
            mcast_tree: BTreeMap::new(),
            traffic_rng: (0..scn.flows.len())
                .map(|i| Rng::stream(seed, "traffic", i as u64))
                .collect(),
            hash_base: Rng::stream(seed, "hash", 0).next_u64(),
            uid: 0,
            prop_ns,
            trace: false,
        };
        run.schedule_failures(seed);
        for &id in &scn.down_links {
            run.truth.set_physical(&ctx.c, LinkId(id), false, 0);
        }
        if matches!(scn.management, Management::Lsa | Management::OspfLsa) {
            // warm start: views equal the ground truth at t = 0
            let mut view = LinkStateView::all_up(&ctx.c);
            for l in ctx.c.links() {
                if !run.truth.is_up(l.id) {
                    view.observe_local(&ctx.c, l.id, false);
                }
            }
            run.views = Some(vec![view; ctx.c.num_sats()]);
            let tick = sec_to_ns(scn.hello_interval_s);
            let mut t = tick;
            while t <= horizon_ns {
                run.schedule(t, EvKind::HelloTick);
                t += tick;
            }
        }
        for (i, flow) in scn.flows.iter().enumerate() {
            let start = sec_to_ns(flow.start_s);
            if start <= horizon_ns {
                run.schedule(
                    start,
                    EvKind::Emit {
                        flow: i as u32,
                        emission: 0,
                    },
                );
            }
        }
        run
    }

    /// Pre-schedules the whole failure/recovery timeline: per physical
    /// link, a two-state Markov process with exponential sojourns whose
    /// stationary down fraction is the configured rate.
    fn schedule_failures(&mut self, seed: u64) {
        let scn = &self.ctx.scn;
        if scn.failure_rate <= 0.0 {
            return;
        }
        for phys in physical_links(&self.ctx.c) {
            let (down0, transitions) =
                failure_timeline(seed, phys, scn.failure_rate, scn.mttr_s, self.horizon_ns);
            if down0 {
                self.truth.set_physical(&self.ctx.c, phys, false, 0);
            }
            let mut down = down0;
            for t in transitions {
                if down {
                    self.schedule(t, EvKind::Recover { phys });
                } else {
                    self.schedule(t, EvKind::Fail { phys });
                }
                down = !down;
            }
        }
    }

    fn schedule(&mut self, t: u64, kind: EvKind) {
        let seq = self.ev_seq;
        self.ev_seq += 1;
        self.heap.push(Reverse(Ev { t, seq, kind }));
    }

    fn run(mut self) -> Metrics {
        while let Some(Reverse(ev)) = self.heap.pop() {
            self.now = ev.t;
            self.metrics.events += 1;
            match ev.kind {
                EvKind::Emit { flow, emission } => self.emit(flow, emission),
                EvKind::Arrive { sat, link_in, pkt } => self.arrive(sat, link_in, pkt),
                EvKind::TxDone { link } => self.tx_done(link),
                EvKind::HelloTick => self.hello_tick(),
                EvKind::Fail { phys } => self.link_transition(phys, false),
                EvKind::Recover { phys } => self.link_transition(phys, true),
            }
        }
        self.metrics
    }

    // ---- link events -----------------------------------------------------

    fn link_transition(&mut self, phys: LinkId, up: bool) {
        self.truth.set_physical(&self.ctx.c, phys, up, self.now);
        let link = self.ctx.c.link(phys);
        for sat in [link.src, link.dst] {
            self.local_version[sat.0 as usize] += 1;
            self.lsa_dirty[sat.0 as usize] = true;
        }
        if let Some(views) = &mut self.views {
            // endpoints monitor their own links in real time
            for sat in [link.src, link.dst] {
                views[sat.0 as usize].observe_local(&self.ctx.c, phys, up);
            }
        }
    }

    fn hello_tick(&mut self) {
        let n = self.ctx.c.num_sats();
        for sat in 0..n as u16 {
            let sat = SatId(sat);
            let announcement = if self.lsa_dirty[sat.0 as usize] {
                self.lsa_dirty[sat.0 as usize] = false;
                self.lsa_seq[sat.0 as usize] += 1;
                Some(Announcement {
                    origin: sat,
                    seq: self.lsa_seq[sat.0 as usize],
                    states: self
                        .ctx
                        .c
                        .neighbors_out(sat)
                        .map(|(l, _)| (l, self.truth.is_up(l)))
                        .collect(),
                })
            } else {
                None
            };
            let out: Vec<LinkId> = self.ctx.c.neighbors_out(sat).map(|(l, _)| l).collect();
            for l in out {
                if !self.truth.is_up(l) {
                    continue;
                }
                // hello every tick; the dirty flag piggybacks a flood
                self.enqueue_ctrl(l, None);
                if let Some(ann) = &announcement {
                    self.enqueue_ctrl(l, Some(ann.clone()));
                }
            }
        }
    }

    fn enqueue_ctrl(&mut self, link: LinkId, ann: Option<Announcement>) {
        let pkt = Box::new(Packet {
            flow: CTRL_FLOW,
            seq: 0,
            payload_bits: CTRL_BITS,
            src: self.ctx.c.link(link).src,
            dests: Vec::new(),
            kind: HeaderKind::Bare,
            normal_bf: None,
            eq_bf: None,
            elr: None,
            next_encoder: None,
            rep_fp: 0,
            ttl: 1,
            created_ns: self.now,
            is_misrouted: false,
            intended: Rc::new(IntendedPath::default()),
            path_pos: 0,
            detour_depth: 0,
            ctrl: ann,
            queue_ns: 0,
            tx_ns: 0,
            prop_ns: 0,
            enc_ns: 0,
        });
        self.metrics.control_packets += 1;
        self.enqueue(link, pkt, self.now);
    }

    // ---- traffic ---------------------------------------------------------

    fn emit(&mut self, flow_idx: u32, emission: u64) {
        let spec = self.ctx.scn.flows[flow_idx as usize].clone();
        let src = self.ctx.c.sat(spec.src.0, spec.src.1);
        let dests: Vec<SatId> = spec
            .dsts
            .iter()
            .map(|&(o, s)| self.ctx.c.sat(o, s))
            .collect();

        match self.ctx.scn.mode {
            Mode::UnicastSource | Mode::UnicastOptimal | Mode::Elr => {
                for &dst in &dests {
                    let pkt = self.build_unicast(flow_idx, src, dst);
                    let fm = &mut self.metrics.flows[flow_idx as usize];
                    fm.sent += 1;
                    fm.expected += 1;
                    match pkt {
                        Some(pkt) => self.arrive(src, None, pkt),
                        None => {
                            *self.metrics.flows[flow_idx as usize]
                                .drops
                                .entry(DropReason::NoRoute)
                                .or_default() += 1;
                        }
                    }
                }
            }
            Mode::MulticastSpf | Mode::MulticastPnb => {
                let pkt = self.build_multicast(flow_idx, src, &dests);
                let fm = &mut self.metrics.flows[flow_idx as usize];
                fm.sent += 1;
                fm.expected += dests.len() as u64;
                match pkt {
                    Some(pkt) => self.arrive(src, None, pkt),
                    None => {
                        *self.metrics.flows[flow_idx as usize]
                            .drops
                            .entry(DropReason::NoRoute)
                            .or_default() += 1;
                    }
                }
            }
            Mode::NodeDemo => unreachable!("demo handled before the event loop"),
        }

        // schedule the next emission
        let start_ns = sec_to_ns(spec.start_s);
        let end_ns = if spec.duration_s.is_finite() {
            start_ns.saturating_add(sec_to_ns(spec.duration_s))
        } else {
            self.horizon_ns
        }
        .min(self.horizon_ns);
        let next_t = match spec.pattern {
            Pattern::Cbr => start_ns + mul_rate(emission + 1, spec.rate_pps),
            Pattern::Poisson => {
                self.now + sec_to_ns(self.traffic_rng[flow_idx as usize].exp(1.0 / spec.rate_pps))
            }
        };
        if next_t <= end_ns {
            self.schedule(
                next_t,
                EvKind::Emit {
                    flow: flow_idx,
                    emission: emission + 1,
                },
            );
        }
    }

    fn next_uid(&mut self) -> u64 {
        self.uid += 1;
        self.uid
    }

    fn salt(&self, flow: u32, uid: u64) -> u64 {
        mix(&[self.hash_base, flow as u64, uid])
    }

    /// Routing view at packet-construction time: believed map under
    /// announcement flooding, otherwise the static relation corrected by
    /// the source's own link knowledge.
    fn source_route(&mut self, at: SatId, dst: SatId) -> Option<Rc<Vec<LinkId>>> {
        let version = match &self.views {
            Some(views) => views[at.0 as usize].version,
            None => self.local_version[at.0 as usize],
        };
        let key = (at.0, dst.0, version);
        if let Some(r) = self.route_cache.get(&key) {
            return Some(r.clone());
        }
        let c = &self.ctx.c;
        let route = match &self.views {
            Some(views) => {
                let view = &views[at.0 as usize];
                compute_route(c, at, dst, |l| view.believes_up(l))
            }
            None => {
                let truth = &self.truth;
                compute_route(c, at, dst, |l| {
                    if c.link(l).src == at {
                        truth.is_up(l)
                    } else {
                        true
                    }
                })
            }
        }?;
        let route = Rc::new(route);
        self.route_cache.insert(key, route.clone());
        Some(route)
    }

    fn dp_plan(&mut self, hops: usize) -> Rc<DpSolution> {
        if let Some(sol) = self.dp_memo.get(&hops) {
            return sol.clone();
        }
        let sol = Rc::new(solve_dp(hops, &self.ctx.dp_curve, &self.ctx.params));
        self.dp_memo.insert(hops, sol.clone());
        sol
    }

    fn build_unicast(&mut self, flow: u32, src: SatId, dst: SatId) -> Option<Box<Packet>> {
        let route = self.source_route(src, dst)?;
        let uid = self.next_uid();
        let salt = self.salt(flow, uid);
        let scn = &self.ctx.scn;
        let mut pkt = Packet {
            flow,
            seq: uid,
            payload_bits: scn.payload_bits,
            src,
            dests: vec![dst],
            kind: HeaderKind::Lir,
            normal_bf: None,
            eq_bf: None,
            elr: None,
            next_encoder: Some(dst),
            rep_fp: salt,
            ttl: scn.ttl,
            created_ns: self.now,
            is_misrouted: false,
            intended: Rc::new(IntendedPath {
                hops: route.as_ref().clone(),
                tree: BTreeSet::new(),
            }),
            path_pos: 0,
            detour_depth: 0,
            ctrl: None,
            queue_ns: 0,
            tx_ns: 0,
            prop_ns: 0,
            enc_ns: 0,
        };
        match scn.mode {
            Mode::Elr => {
                pkt.kind = HeaderKind::Elr;
                pkt.elr = Some(ElrHeader {
                    ids: route.as_ref().clone(),
                    cursor: 0,
                    bits_per_id: self.ctx.elr_bits,
                });
            }
            Mode::UnicastSource => {
                let m = self.ctx.m_for_segment(route.len());
                pkt.normal_bf = Some(encode_path(&route, m, scn.bf_k, salt));
            }
            Mode::UnicastOptimal => {
                let plan = self.dp_plan(route.len());
                let seg = plan.policy.segments()[0].len;
                let m = self.ctx.m_for_segment(seg);
                pkt.normal_bf = Some(encode_path(&route[..seg], m, scn.bf_k, salt));
                pkt.next_encoder = Some(if seg < route.len() {
                    self.ctx.c.link(route[seg - 1]).dst
                } else {
                    dst
                });
            }
            _ => unreachable!(),
        }
        Some(Box::new(pkt))
    }

    fn build_multicast(&mut self, flow: u32, src: SatId, dests: &[SatId]) -> Option<Box<Packet>> {
        let intended = match self.mcast_tree.get(&flow) {
            Some(t) => t.clone(),
            None => {
                let c = &self.ctx.c;
                let tree = match self.ctx.scn.mode {
                    Mode::MulticastSpf => spf_tree(c, src, dests, |_| true)?,
                    Mode::MulticastPnb => {
                        let primary = choose_primary(c, src, dests);
                        pnb_tree(c, src, dests, primary, |_| true)?
                    }
                    _ => unreachable!(),
                };
                let t = Rc::new(IntendedPath {
                    hops: Vec::new(),
                    tree,
                });
                self.mcast_tree.insert(flow, t.clone());
                t
            }
        };
        let uid = self.next_uid();
        let salt = self.salt(flow, uid);
        let ids: Vec<LinkId> = intended.tree.iter().copied().collect();
        let m = self.ctx.m_for_segment(ids.len());
        let scn = &self.ctx.scn;
        Some(Box::new(Packet {
            flow,
            seq: uid,
            payload_bits: scn.payload_bits,
            src,
            dests: dests.to_vec(),
            kind: HeaderKind::Lir,
            normal_bf: Some(encode_path(&ids, m, scn.bf_k, salt)),
            eq_bf: None,
            elr: None,
            next_encoder: None,
            rep_fp: salt,
            ttl: scn.ttl,
            created_ns: self.now,
            is_misrouted: false,
            intended,
            path_pos: 0,
            detour_depth: 0,
            ctrl: None,
            queue_ns: 0,
            tx_ns: 0,
            prop_ns: 0,
            enc_ns: 0,
        }))
    }

    // ---- queues ----------------------------------------------------------

    fn enqueue(&mut self, link: LinkId, pkt: Box<Packet>, enq_t: u64) {
        if pkt.is_misrouted
            && pkt.flow != CTRL_FLOW
            && self.metrics.flows[pkt.flow as usize]
                .misrouted_by_seq
                .get(&pkt.seq)
                .is_some_and(|&n| n >= JUNK_HOP_BUDGET)
        {
            self.metrics.flows[pkt.flow as usize].junk_drops += 1;
            return;
        }
        let iface = &mut self.queues[(link.0 - 1) as usize];
        if iface.transmitting.is_none() {
            debug_assert!(iface.waiting.is_empty());
            self.start_tx(link, pkt, enq_t, enq_t.max(self.now));
        } else if iface.waiting.len() >= self.ctx.scn.queue_capacity as usize {
            self.record_terminal(&pkt, DropReason::QueueFull);
        } else {
            iface.waiting.push_back((pkt, enq_t));
        }
    }

    fn start_tx(&mut self, link: LinkId, mut pkt: Box<Packet>, enq_t: u64, now: u64) {
        if !self.truth.is_up(link) {
            self.record_terminal(&pkt, DropReason::LinkDown);
            self.try_next_tx(link, now);
            return;
        }
        let bits = pkt.total_bits();
        let tx_ns = sec_to_ns(bits as f64 / self.ctx.scn.bandwidth_bps);
        pkt.queue_ns += now.saturating_sub(enq_t);
        pkt.tx_ns += tx_ns;
        if pkt.flow != CTRL_FLOW {
            let lm = self.metrics.links.entry(link.0).or_default();
            lm.packets += 1;
            lm.bits += bits as u128;
            if pkt.is_misrouted {
                lm.misrouted_bits += bits as u128;
                let fm = &mut self.metrics.flows[pkt.flow as usize];
                fm.misrouted_hops += 1;
                fm.misrouted_bits += bits as u128;
                *fm.misrouted_by_seq.entry(pkt.seq).or_default() += 1;
            }
        }
        let iface = &mut self.queues[(link.0 - 1) as usize];
        iface.transmitting = Some(pkt);
        self.schedule(now + tx_ns, EvKind::TxDone { link });
    }

    fn tx_done(&mut self, link: LinkId) {
        let iface = &mut self.queues[(link.0 - 1) as usize];
        let mut pkt = iface
            .transmitting
            .take()
            .expect("transmission completion without a packet");
        let prop = self.prop_delay(link);
        pkt.prop_ns += prop;
        let dst = self.ctx.c.link(link).dst;
        self.schedule(
            self.now + prop,
            EvKind::Arrive {
                sat: dst,
                link_in: Some(link),
                pkt,
            },
        );
        self.try_next_tx(link, self.now);
    }

    fn try_next_tx(&mut self, link: LinkId, now: u64) {
        let iface = &mut self.queues[(link.0 - 1) as usize];
        if iface.transmitting.is_some() {
            return;
        }
        if let Some((pkt, enq_t)) = iface.waiting.pop_front() {
            self.start_tx(link, pkt, enq_t, now);
        }
    }

    fn prop_delay(&self, link: LinkId) -> u64 {
        if self.ctx.scn.orbital_motion {
            sec_to_ns(
                self.ctx
                    .c
                    .propagation_delay_s(link, self.now as f64 / 1.0e9),
            )
        } else {
            self.prop_ns[(link.0 - 1) as usize]
        }
    }

    // ---- arrivals ----------------------------------------------------------

    fn arrive(&mut self, sat: SatId, link_in: Option<LinkId>, pkt: Box<Packet>) {
        if pkt.flow == CTRL_FLOW {
            self.ctrl_arrive(sat, link_in, pkt);
            return;
        }
        match self.ctx.scn.management {
            Management::OspfLsa => self.ospf_arrive(sat, pkt),
            _ => match pkt.kind {
                HeaderKind::Lir => self.lir_arrive(sat, link_in, pkt),
                HeaderKind::Elr => self.elr_arrive(sat, pkt),
                HeaderKind::Bare => unreachable!("bare data packets exist only under ospf"),
            },
        }
    }

    fn ctrl_arrive(&mut self, sat: SatId, link_in: Option<LinkId>, pkt: Box<Packet>) {
        let Some(ann) = &pkt.ctrl else {
            return; // hello: freshness is implicit, nothing to do
        };
        let Some(views) = &mut self.views else {
            return;
        };
        if views[sat.0 as usize].apply(&self.ctx.c, ann) {
            // new information: flood on
            let out: Vec<LinkId> = self
                .ctx
                .c
                .neighbors_out(sat)
                .map(|(l, _)| l)
                .filter(|&l| Some(self.ctx.c.reverse(l)) != link_in && self.truth.is_up(l))
                .collect();
            for l in out {
                self.enqueue_ctrl(l, Some(ann.clone()));
            }
        }
    }

    fn deliver(&mut self, sat: SatId, pkt: &Packet) {
        let first = self.delivered_first.insert((pkt.flow, pkt.seq, sat.0));
        let fm = &mut self.metrics.flows[pkt.flow as usize];
        if first {
            fm.delivered += 1;
            let delay = self.now - pkt.created_ns;
            fm.delay_samples_ns.push(delay);
            fm.queue_ns += pkt.queue_ns as u128;
            fm.tx_ns += pkt.tx_ns as u128;
            fm.prop_ns += pkt.prop_ns as u128;
            fm.enc_ns += pkt.enc_ns as u128;
        } else {
            fm.dup_deliveries += 1;
        }
        if self.trace {
            let (o, sl) = self.ctx.c.orbit_slot(sat);
            self.metrics.trace.push(format!(
                "{{\"t_ns\":{},\"ev\":\"{}\",\"flow\":{},\"seq\":{},\"sat\":[{o},{sl}],\"delay_ns\":{}}}",
                self.now,
                if first { "deliver" } else { "duplicate" },
                pkt.flow,
                pkt.seq,
                self.now - pkt.created_ns
            ));
        }
    }

    fn record_terminal(&mut self, pkt: &Packet, reason: DropReason) {
        if pkt.flow == CTRL_FLOW {
            return;
        }

        let fm = &mut self.metrics.flows[pkt.flow as usize];
        if pkt.is_misrouted {
            fm.junk_drops += 1;
        } else {
            *fm.drops.entry(reason).or_default() += 1;
        }
        if self.trace && !pkt.is_misrouted {
            self.metrics.trace.push(format!(
                "{{\"t_ns\":{},\"ev\":\"drop\",\"flow\":{},\"seq\":{},\"reason\":\"{}\"}}",
                self.now,
                pkt.flow,
                pkt.seq,
                reason.tag()
            ));
        }
    }

    fn elr_arrive(&mut self, sat: SatId, mut pkt: Box<Packet>) {
        match elr_forward(&self.ctx.c, sat, &mut pkt) {
            Action::Deliver => self.deliver(sat, &pkt),
            Action::Forward(links) => {
                let l = links[0];
                pkt.ttl -= 1;
                if self.truth.is_up(l) {
                    self.enqueue(l, pkt, self.now);
                } else {
                    self.record_terminal(&pkt, DropReason::LinkDown);
                }
            }
            Action::Drop(r) => self.record_terminal(&pkt, r),
            other => unreachable!("elr forwarding returned {other:?}"),
        }
    }

    fn ospf_arrive(&mut self, sat: SatId, mut pkt: Box<Packet>) {
        if pkt.is_dest(sat) {
            self.deliver(sat, &pkt);
            return;
        }
        if pkt.ttl == 0 {
            self.record_terminal(&pkt, DropReason::TtlExpired);
            return;
        }
        let dst = pkt.dests[0];
        match self.source_route(sat, dst) {
            Some(route) if !route.is_empty() => {
                let l = route[0];
                pkt.ttl -= 1;
                self.enqueue(l, pkt, self.now);
            }
            _ => self.record_terminal(&pkt, DropReason::NoRoute),
        }
    }

    fn lir_arrive(&mut self, sat: SatId, link_in: Option<LinkId>, mut pkt: Box<Packet>) {
        let mut link_in = link_in;
        // destinations consume before anything else
        let multicast = pkt.dests.len() > 1;
        if pkt.is_dest(sat) {
            self.deliver(sat, &pkt);
            if !multicast {
                return;
            }
        }
        if pkt.is_misrouted {
            let via = link_in.map_or(0, |l| l.0);
            if !self.seen_junk.insert((via, pkt.flow, pkt.seq, pkt.rep_fp)) {
                self.metrics.flows[pkt.flow as usize].junk_drops += 1;
                return;
            }
        }

        // equivalent-path stage: a packet carrying a detour filter follows
        // the per-satellite tables until no entry matches, then resumes
        if self.ctx.scn.management == Management::Odd && pkt.eq_bf.is_some() {
            if let Some(out) = self.eq_stage(sat, &mut pkt) {
                if pkt.ttl == 0 {
                    self.record_terminal(&pkt, DropReason::TtlExpired);
                    return;
                }
                pkt.ttl -= 1;
                self.enqueue(out, pkt, self.now);
                return;
            }
            if pkt.eq_bf.is_none() && pkt.detour_depth == u8::MAX {
                // sentinel set by eq_stage: unrecoverable detour failure
                self.record_terminal(&pkt, DropReason::LinkDown);
                return;
            }
            // detour complete: the packet resumes the original route as if
            // it had crossed the bypassed link itself, so the arrival link
            // must not mask the route's continuation
            link_in = None;
        }

        let mut charged = 0u64;
        loop {
            match forward_decision(&self.ctx.c, sat, link_in, &pkt) {
                Action::Deliver => {
                    // unicast destination handled above; multicast consumed
                    // its copy already and has nowhere to relay
                    if !multicast {
                        self.deliver(sat, &pkt);
                    }
                    return;
                }
                Action::DeliverAndForward(links) | Action::Forward(links) => {
                    // the deliver half already happened above
                    self.forward_links(sat, links, pkt, charged);
                    return;
                }
                Action::ReEncode => {
                    if charged > 0 {
                        // a re-encoded filter always matches its first link
                        self.record_terminal(&pkt, DropReason::DeadEnd);
                        return;
                    }
                    match self.re_encode(sat, &mut pkt) {
                        Ok(()) => {
                            charged = sec_to_ns(self.ctx.scn.tau_s);
                            continue;
                        }
                        Err(reason) => {
                            self.record_terminal(&pkt, reason);
                            return;
                        }
                    }
                }
                Action::Drop(r) => {
                    self.record_terminal(&pkt, r);
                    return;
                }
            }
        }
    }

    /// Detour lookup. `Some(link)` continues the detour; `None` with a
    /// cleared filter resumes normal forwarding; `None` with the depth
    /// sentinel means the packet is lost to nested failures.
    fn eq_stage(&mut self, sat: SatId, pkt: &mut Packet) -> Option<LinkId> {
        let tables = self.ctx.eq_tables.as_ref().expect("odd tables built");
        let eq = pkt.eq_bf.as_mut().expect("eq filter present");
        let fallback = self.ctx.scn.odd_fallback;
        let mut matches: Vec<(LinkId, LinkId)> = Vec::new();
        for (&failed, &out) in tables.clockwise(sat) {
            if eq.query(failed) {
                matches.push((failed, out));
            }
        }
        if fallback {
            for (&failed, &out) in tables.counterclockwise(sat) {
                if eq.query(failed) {
                    matches.push((failed, out));
                }
            }
        }
        if matches.is_empty() {
            // detour complete; the depth budget is per recovery, not per
            // packet lifetime
            pkt.eq_bf = None;
            pkt.detour_depth = 0;
            return None;
        }
        // prefer a live interface; then the smallest pair for determinism
        matches.sort();
        let chosen = matches
            .iter()
            .find(|&&(_, out)| self.truth.is_up(out))
            .copied();
        match chosen {
            Some((_, out)) => Some(out),
            None => {
                let (_, out) = matches[0];
                // nested failure on the detour
                if fallback && pkt.detour_depth < 1 {
                    if let Some(next) = self.start_detour(sat, out, pkt) {
                        pkt.detour_depth += 1;
                        let fm = &mut self.metrics.flows[pkt.flow as usize];
                        fm.detours += 1;
                        return Some(next);
                    }
                }
                pkt.eq_bf = None;
                pkt.detour_depth = u8::MAX; // loss sentinel, see caller
                None
            }
        }
    }

    /// Inserts `failed` into the packet's equivalent-path filter and
    /// returns the first detour hop that is currently up.
    fn start_detour(&mut self, sat: SatId, failed: LinkId, pkt: &mut Packet) -> Option<LinkId> {
        let tables = self.ctx.eq_tables.as_ref()?;
        let mut first = tables
            .clockwise(sat)
            .get(&failed)
            .copied()
            .filter(|&l| self.truth.is_up(l));
        if first.is_none() && self.ctx.scn.odd_fallback {
            first = tables
                .counterclockwise(sat)
                .get(&failed)
                .copied()
                .filter(|&l| self.truth.is_up(l));
        }
        let first = first?;
        let eq = pkt.eq_bf.get_or_insert_with(|| {
            BloomFilter::new(
                self.ctx.scn.m_eq,
                self.ctx.scn.bf_k,
                mix(&[self.hash_base, pkt.flow as u64, pkt.seq, 0x0dd]),
            )
        });
        eq.insert(failed);
        Some(first)
    }

    fn forward_links(&mut self, sat: SatId, links: Vec<LinkId>, pkt: Box<Packet>, extra_ns: u64) {
        if pkt.ttl == 0 {
            self.record_terminal(&pkt, DropReason::TtlExpired);
            return;
        }
        let t = self.now + extra_ns;
        let multicast = pkt.dests.len() > 1;
        let mut rerouted = false;
        let mut copies: Vec<(LinkId, Box<Packet>)> = Vec::with_capacity(links.len());
        for &l in &links {
            let mut copy = pkt.clone();
            copy.ttl -= 1;
            if multicast {
                copy.is_misrouted = pkt.is_misrouted || !pkt.intended.tree.contains(&l);
            } else if !pkt.is_misrouted && pkt.intended.hops.get(pkt.path_pos) == Some(&l) {
                copy.is_misrouted = false;
                copy.path_pos += 1;
            } else {
                copy.is_misrouted = true;
            }
            copies.push((l, copy));
        }
        for (l, mut copy) in copies {
            if self.truth.is_up(l) {
                self.enqueue(l, copy, t);
                continue;
            }
            match self.ctx.scn.management {
                Management::None | Management::Lsa => {
                    self.record_terminal(&copy, DropReason::LinkDown);
                }
                Management::Odr => {
                    if rerouted {
                        // one recovery per arrival; extra down positives
                        // were duplicates of the same decision
                        if copy.is_misrouted {
                            self.record_terminal(&copy, DropReason::LinkDown);
                        }
                        continue;
                    }
                    rerouted = true;
                    match self.odr_reroute(sat, &mut copy) {
                        Ok(first) => {
                            let tau = sec_to_ns(self.ctx.scn.tau_s);
                            self.metrics.flows[copy.flow as usize].reroutes += 1;
                            self.enqueue(first, copy, t + tau);
                        }
                        Err(reason) => self.record_terminal(&copy, reason),
                    }
                }
                Management::Odd => match self.start_detour(sat, l, &mut copy) {
                    Some(first) => {
                        self.metrics.flows[copy.flow as usize].detours += 1;
                        self.enqueue(first, copy, t);
                    }
                    None => self.record_terminal(&copy, DropReason::LinkDown),
                },
                Management::OspfLsa => unreachable!("ospf packets never reach lir forwarding"),
            }
        }
    }

    /// Recomputes the remaining route without the failed link and replaces
    /// the in-packet filter. The new route leaves on a link this satellite
    /// knows to be up.
    fn odr_reroute(&mut self, sat: SatId, pkt: &mut Packet) -> Result<LinkId, DropReason> {
        let dst = *pkt.dests.first().ok_or(DropReason::NoRoute)?;
        let c = &self.ctx.c;
        let truth = &self.truth;
        let route = compute_route(c, sat, dst, |l| {
            if c.link(l).src == sat {
                truth.is_up(l)
            } else {
                true
            }
        })
        .ok_or(DropReason::NoRoute)?;
        let seg = if self.ctx.scn.odr_replan {
            self.dp_plan(route.len()).policy.segments()[0].len
        } else {
            route.len()
        };
        let salt = self.salt(pkt.flow, pkt.seq);
        let m = self.ctx.m_for_segment(seg);
        let bf = encode_path(&route[..seg], m, self.ctx.scn.bf_k, salt);
        pkt.next_encoder = Some(if seg < route.len() {
            self.ctx.c.link(route[seg - 1]).dst
        } else {
            dst
        });
        pkt.enc_ns += sec_to_ns(self.ctx.scn.tau_s);
        pkt.rep_fp = mix(&[pkt.rep_fp, 0x5e60]);
        let first = route[0];
        pkt.intended = Rc::new(IntendedPath {
            hops: route,
            tree: BTreeSet::new(),
        });
        pkt.path_pos = 1; // the caller forwards along `first`
        pkt.normal_bf = Some(bf);
        Ok(first)
    }

    /// Segment boundary: look the remaining route up, encode the next
    /// segment, advance the designated re-encoder, charge the processing
    /// delay.
    fn re_encode(&mut self, sat: SatId, pkt: &mut Packet) -> Result<(), DropReason> {
        let dst = *pkt.dests.first().ok_or(DropReason::NoRoute)?;
        let c = &self.ctx.c;
        let truth = &self.truth;
        let route = compute_route(c, sat, dst, |l| {
            if c.link(l).src == sat {
                truth.is_up(l)
            } else {
                true
            }
        })
        .ok_or(DropReason::NoRoute)?;
        if route.is_empty() {
            return Err(DropReason::NoRoute);
        }
        let plan = match self.ctx.scn.mode {
            Mode::UnicastOptimal => self.dp_plan(route.len()).policy.segments()[0].len,
            _ => route.len(),
        };
        let salt = self.salt(pkt.flow, pkt.seq);
        let m = self.ctx.m_for_segment(plan);
        let bf = pkt.normal_bf.as_mut().ok_or(DropReason::DeadEnd)?;
        // fresh filter for the new segment (clear + re-insert, possibly at
        // a different length)
        *bf = encode_path(&route[..plan], m, self.ctx.scn.bf_k, salt);
        pkt.next_encoder = Some(if plan < route.len() {
            self.ctx.c.link(route[plan - 1]).dst
        } else {
            dst
        });
        pkt.enc_ns += sec_to_ns(self.ctx.scn.tau_s);
        pkt.rep_fp = mix(&[pkt.rep_fp, 0x5e60]);
        if !pkt.is_misrouted {
            pkt.intended = Rc::new(IntendedPath {
                hops: route,
                tree: BTreeSet::new(),
            });
            pkt.path_pos = 0;
        }
        self.metrics.flows[pkt.flow as usize].reencodes += 1;
        Ok(())
    }
}

impl SimContext {
    /// Time-weighted fraction of physical links down over the horizon,
    /// from the same timelines the run would schedule.
    pub fn measure_down_fraction(&self, seed: u64) -> f64 {
        if self.scn.failure_rate <= 0.0 {
            return 0.0;
        }
        let horizon = sec_to_ns(self.scn.horizon_s);
        let mut down_ns = 0u128;
        let mut total_ns = 0u128;
        for phys in physical_links(&self.c) {
            let (down0, transitions) =
                failure_timeline(seed, phys, self.scn.failure_rate, self.scn.mttr_s, horizon);
            let mut down = down0;
            let mut last = 0u64;
            for t in transitions {
                if down {
                    down_ns += (t - last) as u128;
                }
                last = t;
                down = !down;
            }
            if down {
                down_ns += (horizon - last) as u128;
            }
            total_ns += horizon as u128;
        }
        down_ns as f64 / total_ns as f64
    }
}

fn physical_links(c: &Constellation) -> Vec<LinkId> {
    c.links()
        .iter()
        .map(|l| l.id)
        .filter(|&id| id < c.reverse(id))
        .collect()
}

/// Initial state and transition instants of one physical link's
/// fail/recover process. Sojourns are exponential with mean `mttr` down
/// and `mttr * (1 - r) / r` up, so the stationary down probability is `r`;
/// the initial state is drawn from that stationary law.
fn failure_timeline(
    seed: u64,
    phys: LinkId,
    rate: f64,
    mttr_s: f64,
    horizon_ns: u64,
) -> (bool, Vec<u64>) {
    let mut rng = Rng::stream(seed, "failure", phys.0 as u64);
    let mean_down = mttr_s;
    let mean_up = mttr_s * (1.0 - rate) / rate;
    let down0 = rng.next_f64() < rate;
    let mut down = down0;
    let mut t = 0u64;
    let mut out = Vec::new();
    loop {
        let sojourn = if down {
            rng.exp(mean_down)
        } else {
            rng.exp(mean_up)
        };
        t = t.saturating_add(sec_to_ns(sojourn));
        if t > horizon_ns {
            break;
        }
        out.push(t);
        down = !down;
    }
    (down0, out)
}

#[inline]
fn sec_to_ns(s: f64) -> u64 {
    (s * 1.0e9).round() as u64
}

/// Emission instant of packet `k` of a constant-rate flow, exact to the
/// nanosecond without cumulative drift.
#[inline]
fn mul_rate(k: u64, rate_pps: f64) -> u64 {
    ((k as f64) * 1.0e9 / rate_pps).round() as u64
}
