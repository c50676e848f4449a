//! Asynchronous distributed Bellman-Ford with the same adaptive link costs as
//! the link-state protocol. Each node periodically sends its distance vector
//! to every neighbor.

use serde::{Deserialize, Serialize};

use super::{broadcast_phase, hop_table, to_neighbor};
use crate::error::{Error, Result};
use crate::network::packet::{Packet, PacketKind, Payload};
use crate::network::topology::{LinkId, NodeId, Topology};
use crate::network::{Network, Transmission};
use crate::routing::distance_vector::CostTable;
use crate::routing::link_cost::LinkCostEstimator;
use crate::routing::{Outcome, RoutingAlgorithm};

pub const BF_ELABORATION_S: f64 = 0.002;

/// Distance-vector packet size in bits on an `n`-node network.
pub fn vector_bits(node_count: usize) -> u64 {
    (24 + 12 * node_count as u64) * 8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BfParams {
    pub broadcast_interval_s: f64,
}

impl Default for BfParams {
    fn default() -> Self {
        BfParams {
            broadcast_interval_s: 0.8,
        }
    }
}

impl BfParams {
    pub fn validate(&self) -> Result<()> {
        if self.broadcast_interval_s > 0.0 && self.broadcast_interval_s.is_finite() {
            Ok(())
        } else {
            Err(Error::config("bf.broadcast_interval_s", "must be positive"))
        }
    }
}

pub struct BellmanFord {
    params: BfParams,
    estimators: Vec<LinkCostEstimator>,
    tables: Vec<CostTable>,
    fallback: Vec<Vec<Option<LinkId>>>,
}

impl BellmanFord {
    pub fn new(topo: &Topology, params: BfParams) -> Result<Self> {
        params.validate()?;
        let estimators = vec![LinkCostEstimator::default(); topo.link_count()];
        let tables = topo
            .nodes()
            .map(|u| {
                let costs = topo
                    .out_links(u)
                    .iter()
                    .map(|l| estimators[l.index()].cost() as f64)
                    .collect();
                CostTable::new(topo, u, costs)
            })
            .collect();
        Ok(BellmanFord {
            params,
            estimators,
            tables,
            fallback: hop_table(topo),
        })
    }

    pub fn table(&self, node: NodeId) -> &CostTable {
        &self.tables[node.index()]
    }
}

impl RoutingAlgorithm for BellmanFord {
    fn name(&self) -> &'static str {
        "bf"
    }

    fn elaboration_time(&self) -> f64 {
        BF_ELABORATION_S
    }

    fn start(&mut self, net: &mut Network) {
        let interval = self.params.broadcast_interval_s;
        for node in net.topology().nodes().collect::<Vec<_>>() {
            let phase = broadcast_phase(net.phase_rng(), interval);
            net.schedule_timer(phase, node, 0);
        }
    }

    fn on_transmission(&mut self, _net: &mut Network, done: &Transmission) {
        self.estimators[done.link.index()].record(done.sojourn, done.tx_time);
    }

    fn on_timer(&mut self, net: &mut Network, node: NodeId, _tag: u64) {
        let links = net.topology().out_links(node).to_vec();
        let costs: Vec<f64> = links
            .iter()
            .map(|l| self.estimators[l.index()].close_window() as f64)
            .collect();
        let table = &mut self.tables[node.index()];
        table.set_link_costs(&costs);
        let bits = vector_bits(net.topology().node_count());
        let now = net.now();
        for l in links {
            let to = net.topology().link(l).to;
            let p = Packet::new(PacketKind::RoutingInfo, bits, node, to, now)
                .with_payload(Payload::DistanceVector(table.vector().to_vec()));
            net.send(l, p);
        }
        net.schedule_timer(self.params.broadcast_interval_s, node, 0);
    }

    fn on_routing_packet(&mut self, net: &mut Network, node: NodeId, via: LinkId, packet: Box<Packet>) -> Outcome {
        if let Payload::DistanceVector(v) = &packet.payload {
            let from = net.topology().link(via).from;
            let slot = net
                .topology()
                .neighbor_slot(node, from)
                .expect("vectors come from neighbors");
            self.tables[node.index()].merge(slot, v);
        }
        Outcome::Consumed
    }

    fn select_next_hop(&mut self, net: &mut Network, node: NodeId, packet: &Packet, _via: Option<LinkId>) -> LinkId {
        let topo = net.topology();
        match self.tables[node.index()].next_slot(packet.dst) {
            Some(slot) => topo.out_links(node)[slot],
            None => self.fallback[node.index()][packet.dst.index()].expect("topology is connected"),
        }
    }

    fn preferred_next_hop(&self, net: &Network, node: NodeId, dst: NodeId) -> Option<NodeId> {
        self.tables[node.index()]
            .next_hop(dst)
            .or_else(|| to_neighbor(net.topology(), self.fallback[node.index()][dst.index()]))
    }
}
