//! Q-routing and predictive Q-routing. Every data hop k -> n triggers a small
//! feedback packet from n back to k carrying n's best estimate of the
//! remaining time to the destination.

use serde::{Deserialize, Serialize};

use super::{to_neighbor, REFERENCE_PACKET_BITS};
use crate::error::{Error, Result};
use crate::network::packet::{Packet, PacketKind, Payload};
use crate::network::topology::{LinkId, NodeId, Topology};
use crate::network::Network;
use crate::routing::{Outcome, RoutingAlgorithm};

pub const Q_ELABORATION_S: f64 = 0.003;
pub const FEEDBACK_BITS: u64 = 12 * 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QrParams {
    pub learning_rate: f64,
}

impl Default for QrParams {
    fn default() -> Self {
        QrParams { learning_rate: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PqrParams {
    pub learning_rate: f64,
    /// Weight of a new recovery-rate sample.
    pub beta: f64,
    /// Decay of the recovery rate when estimates worsen.
    pub gamma: f64,
}

impl Default for PqrParams {
    fn default() -> Self {
        PqrParams {
            learning_rate: 0.5,
            beta: 0.7,
            gamma: 0.9,
        }
    }
}

fn unit_interval(key: &str, v: f64) -> Result<()> {
    if v > 0.0 && v <= 1.0 {
        Ok(())
    } else {
        Err(Error::config(key, format!("must lie in (0, 1], got {v}")))
    }
}

impl QrParams {
    pub fn validate(&self) -> Result<()> {
        unit_interval("qr.learning_rate", self.learning_rate)
    }
}

impl PqrParams {
    pub fn validate(&self) -> Result<()> {
        unit_interval("pqr.learning_rate", self.learning_rate)?;
        unit_interval("pqr.beta", self.beta)?;
        unit_interval("pqr.gamma", self.gamma)
    }
}

/// One Q-learning step towards `estimate`.
pub fn q_update(q: f64, estimate: f64, rate: f64) -> f64 {
    q + rate * (estimate - q)
}

/// Q-values `q[node][dst * degree + slot]` seeded with hop counts times the
/// reference packet's transmission time on the first link.
#[allow(clippy::needless_range_loop)]
fn initial_q(topo: &Topology) -> Vec<Vec<f64>> {
    let hops: Vec<Vec<Option<u32>>> = topo.nodes().map(|s| topo.hop_distances(s)).collect();
    topo.nodes()
        .map(|k| {
            let links = topo.out_links(k);
            let mut q = Vec::with_capacity(topo.node_count() * links.len());
            for d in 0..topo.node_count() {
                for &l in links {
                    let link = topo.link(l);
                    let h = hops[link.to.index()][d].expect("connected") as f64;
                    q.push((1.0 + h) * REFERENCE_PACKET_BITS as f64 / link.bandwidth_bps);
                }
            }
            q
        })
        .collect()
}

/// Index of the smallest value; the lowest index wins ties.
fn argmin(values: impl Iterator<Item = f64>) -> usize {
    let mut best = f64::INFINITY;
    let mut arg = 0;
    for (i, v) in values.enumerate() {
        if v < best {
            best = v;
            arg = i;
        }
    }
    arg
}

/// Sends the feedback for a data hop that ended at `node`. The hop time is
/// the queueing plus transmission time spent at the previous node.
fn send_feedback(net: &mut Network, node: NodeId, via: LinkId, packet: &Packet, estimate: f64) {
    let now = net.now();
    let link = net.topology().link(via);
    let (back, prev) = (link.reverse, link.from);
    let fb = Packet::new(PacketKind::RoutingInfo, FEEDBACK_BITS, node, prev, now).with_payload(
        Payload::QFeedback {
            dst: packet.dst,
            from: node,
            estimate,
            hop_time: packet.last_tx_end - packet.enqueued_at,
        },
    );
    net.send(back, fb);
}

pub struct QRouting {
    params: QrParams,
    q: Vec<Vec<f64>>,
    degree: Vec<usize>,
}

impl QRouting {
    pub fn new(topo: &Topology, params: QrParams) -> Result<Self> {
        params.validate()?;
        Ok(QRouting {
            params,
            q: initial_q(topo),
            degree: topo.nodes().map(|k| topo.degree(k)).collect(),
        })
    }

    pub fn q_row(&self, node: NodeId, dst: NodeId) -> &[f64] {
        let deg = self.degree[node.index()];
        &self.q[node.index()][dst.index() * deg..(dst.index() + 1) * deg]
    }

    fn best(&self, node: NodeId, dst: NodeId) -> f64 {
        if node == dst {
            return 0.0;
        }
        self.q_row(node, dst).iter().copied().fold(f64::INFINITY, f64::min)
    }
}

impl RoutingAlgorithm for QRouting {
    fn name(&self) -> &'static str {
        "qr"
    }

    fn elaboration_time(&self) -> f64 {
        Q_ELABORATION_S
    }

    fn start(&mut self, _net: &mut Network) {}

    fn on_data_arrival(&mut self, net: &mut Network, node: NodeId, via: LinkId, packet: &Packet) {
        let estimate = self.best(node, packet.dst);
        send_feedback(net, node, via, packet, estimate);
    }

    fn on_routing_packet(&mut self, net: &mut Network, node: NodeId, _via: LinkId, packet: Box<Packet>) -> Outcome {
        if let Payload::QFeedback {
            dst,
            from,
            estimate,
            hop_time,
        } = packet.payload
        {
            let slot = net.topology().neighbor_slot(node, from).expect("feedback from a neighbor");
            let deg = self.degree[node.index()];
            let q = &mut self.q[node.index()][dst.index() * deg + slot];
            *q = q_update(*q, estimate + hop_time, self.params.learning_rate);
        }
        Outcome::Consumed
    }

    fn select_next_hop(&mut self, net: &mut Network, node: NodeId, packet: &Packet, _via: Option<LinkId>) -> LinkId {
        let slot = argmin(self.q_row(node, packet.dst).iter().copied());
        net.topology().out_links(node)[slot]
    }

    fn preferred_next_hop(&self, net: &Network, node: NodeId, dst: NodeId) -> Option<NodeId> {
        if node == dst {
            return None;
        }
        let slot = argmin(self.q_row(node, dst).iter().copied());
        to_neighbor(net.topology(), Some(net.topology().out_links(node)[slot]))
    }
}

/// Predictive Q-value entry: estimate, best estimate seen, recovery rate and
/// time of the last update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PqEntry {
    pub q: f64,
    pub best: f64,
    pub recovery: f64,
    pub updated_at: f64,
}

impl PqEntry {
    pub fn new(q: f64) -> Self {
        PqEntry {
            q,
            best: q,
            recovery: 0.0,
            updated_at: 0.0,
        }
    }

    pub fn update(&mut self, estimate: f64, now: f64, p: &PqrParams) {
        let delta = estimate - self.q;
        self.q += p.learning_rate * delta;
        self.best = self.best.min(self.q);
        let idle = now - self.updated_at;
        if delta < 0.0 {
            if idle > 0.0 {
                self.recovery += p.beta * delta / idle;
            }
        } else if delta > 0.0 {
            self.recovery *= p.gamma;
        }
        self.updated_at = now;
    }

    /// Estimate relaxed towards the best value by the recovery rate times the
    /// time since the last update.
    pub fn predicted(&self, now: f64) -> f64 {
        (self.q + self.recovery * (now - self.updated_at)).max(self.best)
    }
}

pub struct PqRouting {
    params: PqrParams,
    q: Vec<Vec<PqEntry>>,
    degree: Vec<usize>,
}

impl PqRouting {
    pub fn new(topo: &Topology, params: PqrParams) -> Result<Self> {
        params.validate()?;
        Ok(PqRouting {
            params,
            q: initial_q(topo)
                .into_iter()
                .map(|row| row.into_iter().map(PqEntry::new).collect())
                .collect(),
            degree: topo.nodes().map(|k| topo.degree(k)).collect(),
        })
    }

    pub fn entries(&self, node: NodeId, dst: NodeId) -> &[PqEntry] {
        let deg = self.degree[node.index()];
        &self.q[node.index()][dst.index() * deg..(dst.index() + 1) * deg]
    }

    fn best(&self, node: NodeId, dst: NodeId) -> f64 {
        if node == dst {
            return 0.0;
        }
        self.entries(node, dst).iter().map(|e| e.q).fold(f64::INFINITY, f64::min)
    }

    fn choose(&self, node: NodeId, dst: NodeId, now: f64) -> usize {
        argmin(self.entries(node, dst).iter().map(|e| e.predicted(now)))
    }
}

impl RoutingAlgorithm for PqRouting {
    fn name(&self) -> &'static str {
        "pqr"
    }

    fn elaboration_time(&self) -> f64 {
        Q_ELABORATION_S
    }

    fn start(&mut self, _net: &mut Network) {}

    fn on_data_arrival(&mut self, net: &mut Network, node: NodeId, via: LinkId, packet: &Packet) {
        let estimate = self.best(node, packet.dst);
        send_feedback(net, node, via, packet, estimate);
    }

    fn on_routing_packet(&mut self, net: &mut Network, node: NodeId, _via: LinkId, packet: Box<Packet>) -> Outcome {
        if let Payload::QFeedback {
            dst,
            from,
            estimate,
            hop_time,
        } = packet.payload
        {
            let slot = net.topology().neighbor_slot(node, from).expect("feedback from a neighbor");
            let deg = self.degree[node.index()];
            let now = net.now();
            self.q[node.index()][dst.index() * deg + slot].update(estimate + hop_time, now, &self.params);
        }
        Outcome::Consumed
    }

    fn select_next_hop(&mut self, net: &mut Network, node: NodeId, packet: &Packet, _via: Option<LinkId>) -> LinkId {
        let slot = self.choose(node, packet.dst, net.now());
        net.topology().out_links(node)[slot]
    }

    fn preferred_next_hop(&self, net: &Network, node: NodeId, dst: NodeId) -> Option<NodeId> {
        if node == dst {
            return None;
        }
        let slot = self.choose(node, dst, net.now());
        to_neighbor(net.topology(), Some(net.topology().out_links(node)[slot]))
    }
}
