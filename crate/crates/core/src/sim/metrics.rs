//! Run metrics and their CSV projections.

use std::collections::BTreeMap;

use crate::forwarding::DropReason;
use crate::scenario::Scenario;

#[derive(Clone, Debug, Default)]
pub struct FlowMetrics {
    /// packets handed to the source interface (one per destination copy for
    /// one-to-many unicast; one per emission for multicast)
    pub sent: u64,
    /// first-copy deliveries per (packet, destination)
    pub delivered: u64,
    /// `sent * group size` for multicast, `sent` otherwise
    pub expected: u64,
    pub dup_deliveries: u64,
    /// terminal fate of on-path copies, by reason
    pub drops: BTreeMap<DropReason, u64>,
    /// deaths of misrouted copies (informational; junk is born from false
    /// positives and is expected to die at dead ends)
    pub junk_drops: u64,
    pub delay_samples_ns: Vec<u64>,
    pub queue_ns: u128,
    pub tx_ns: u128,
    pub prop_ns: u128,
    pub enc_ns: u128,
    pub misrouted_hops: u64,
    pub misrouted_bits: u128,
    /// wrong-hop count per packet sequence number (only packets that
    /// misrouted at least once appear)
    pub misrouted_by_seq: BTreeMap<u64, u32>,
    pub reencodes: u64,
    pub reroutes: u64,
    pub detours: u64,
}

impl FlowMetrics {
    pub fn drop_count(&self, r: DropReason) -> u64 {
        self.drops.get(&r).copied().unwrap_or(0)
    }

    pub fn total_drops(&self) -> u64 {
        self.drops.values().sum()
    }

    pub fn delivery_ratio(&self) -> f64 {
        if self.expected == 0 {
            return 1.0;
        }
        self.delivered as f64 / self.expected as f64
    }

    pub fn mean_delay_s(&self) -> f64 {
        if self.delay_samples_ns.is_empty() {
            return 0.0;
        }
        let sum: u128 = self.delay_samples_ns.iter().map(|&x| x as u128).sum();
        sum as f64 / self.delay_samples_ns.len() as f64 / 1.0e9
    }

    pub fn mean_component_s(&self, total_ns: u128) -> f64 {
        if self.delay_samples_ns.is_empty() {
            return 0.0;
        }
        total_ns as f64 / self.delay_samples_ns.len() as f64 / 1.0e9
    }

    pub fn percentile_s(&self, q: f64) -> f64 {
        if self.delay_samples_ns.is_empty() {
            return 0.0;
        }
        let mut v = self.delay_samples_ns.clone();
        v.sort_unstable();
        let idx = ((v.len() - 1) as f64 * q).round() as usize;
        v[idx] as f64 / 1.0e9
    }
}

#[derive(Clone, Debug, Default)]
pub struct LinkMetrics {
    pub packets: u64,
    pub bits: u128,
    pub misrouted_bits: u128,
}

#[derive(Clone, Debug, Default)]
pub struct Metrics {
    pub flows: Vec<FlowMetrics>,
    /// keyed by link identifier value
    pub links: BTreeMap<u32, LinkMetrics>,
    pub events: u64,
    pub control_packets: u64,
    /// per-packet event lines (populated only when tracing is on)
    pub trace: Vec<String>,
}

pub const FLOWS_CSV_HEADER: &str = "scenario,seed,flow,mode,management,sent,delivered,expected,\
delivery_ratio,dup_deliveries,drop_ttl,drop_dead_end,drop_queue_full,drop_link_down,\
drop_no_route,junk_drops,delay_mean_s,delay_p50_s,delay_p90_s,delay_p99_s,queuing_mean_s,\
transmission_mean_s,propagation_mean_s,encoding_mean_s,misrouted_hops,misrouted_bits,\
wrong_hops_per_packet,reencodes,reroutes,detours";

pub const LINKS_CSV_HEADER: &str =
    "scenario,seed,link_id,src_orbit,src_slot,dst_orbit,dst_slot,packets,bits,misrouted_bits";

impl Metrics {
    /// One CSV row per flow, each row carrying the scenario hash and seed.
    pub fn flows_csv_rows(&self, scn: &Scenario, seed: u64) -> String {
        let hash = scn.hash();
        let mut out = String::new();
        for (i, f) in self.flows.iter().enumerate() {
            let wrong = if f.sent == 0 {
                0.0
            } else {
                f.misrouted_hops as f64 / f.sent as f64
            };
            out.push_str(&format!(
                "{hash},{seed},{i},{},{},{},{},{},{:.6},{},{},{},{},{},{},{},{:.9},{:.9},{:.9},{:.9},{:.9},{:.9},{:.9},{:.9},{},{},{:.6},{},{},{}\n",
                scn.mode.tag(),
                scn.management.tag(),
                f.sent,
                f.delivered,
                f.expected,
                f.delivery_ratio(),
                f.dup_deliveries,
                f.drop_count(DropReason::TtlExpired),
                f.drop_count(DropReason::DeadEnd),
                f.drop_count(DropReason::QueueFull),
                f.drop_count(DropReason::LinkDown),
                f.drop_count(DropReason::NoRoute),
                f.junk_drops,
                f.mean_delay_s(),
                f.percentile_s(0.50),
                f.percentile_s(0.90),
                f.percentile_s(0.99),
                f.mean_component_s(f.queue_ns),
                f.mean_component_s(f.tx_ns),
                f.mean_component_s(f.prop_ns),
                f.mean_component_s(f.enc_ns),
                f.misrouted_hops,
                f.misrouted_bits,
                wrong,
                f.reencodes,
                f.reroutes,
                f.detours,
            ));
        }
        out
    }

    pub fn links_csv_rows(&self, c: &crate::Constellation, scn: &Scenario, seed: u64) -> String {
        let hash = scn.hash();
        let mut out = String::new();
        for (&id, l) in &self.links {
            let link = c.link(crate::LinkId(id));
            let (so, ss) = c.orbit_slot(link.src);
            let (to, ts) = c.orbit_slot(link.dst);
            out.push_str(&format!(
                "{hash},{seed},{id},{so},{ss},{to},{ts},{},{},{}\n",
                l.packets, l.bits, l.misrouted_bits
            ));
        }
        out
    }
}
