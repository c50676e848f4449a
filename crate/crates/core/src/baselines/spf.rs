//! Adaptive link-state routing: each node measures its links over a window,
//! floods the discrete costs and runs Dijkstra over its replicated map.

use serde::{Deserialize, Serialize};

use super::ospf::{lsa_bits, reflood, LINK_STATE_ELABORATION_S};
use super::{broadcast_phase, hop_table, to_neighbor};
use crate::error::{Error, Result};
use crate::network::packet::{LinkStateAd, Packet, Payload};
use crate::network::topology::{LinkId, NodeId, Topology};
use crate::network::{Network, Transmission};
use crate::routing::flooding::LinkStateDb;
use crate::routing::link_cost::LinkCostEstimator;
use crate::routing::shortest_path::dijkstra;
use crate::routing::{Outcome, RoutingAlgorithm};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpfParams {
    /// Broadcast period, also the link-cost averaging window.
    pub broadcast_interval_s: f64,
}

impl Default for SpfParams {
    fn default() -> Self {
        SpfParams {
            broadcast_interval_s: 0.8,
        }
    }
}

impl SpfParams {
    pub fn validate(&self) -> Result<()> {
        if self.broadcast_interval_s > 0.0 && self.broadcast_interval_s.is_finite() {
            Ok(())
        } else {
            Err(Error::config("spf.broadcast_interval_s", "must be positive"))
        }
    }
}

struct NodeState {
    db: LinkStateDb,
    routes: Vec<Option<LinkId>>,
    dirty: bool,
    seq: u64,
}

pub struct Spf {
    params: SpfParams,
    estimators: Vec<LinkCostEstimator>,
    nodes: Vec<NodeState>,
    fallback: Vec<Vec<Option<LinkId>>>,
}

impl Spf {
    pub fn new(topo: &Topology, params: SpfParams) -> Result<Self> {
        params.validate()?;
        let n = topo.node_count();
        Ok(Spf {
            params,
            estimators: vec![LinkCostEstimator::default(); topo.link_count()],
            nodes: (0..n)
                .map(|_| NodeState {
                    db: LinkStateDb::new(n),
                    routes: vec![None; n],
                    dirty: true,
                    seq: 0,
                })
                .collect(),
            fallback: hop_table(topo),
        })
    }

    pub fn link_cost(&self, link: LinkId) -> u8 {
        self.estimators[link.index()].cost()
    }

    fn refresh(&mut self, topo: &Topology, node: NodeId) {
        let st = &mut self.nodes[node.index()];
        if st.dirty {
            let db = &st.db;
            st.routes = dijkstra(topo, node, |l| db.cost(topo, l)).first_link;
            st.dirty = false;
        }
    }

    fn route(&mut self, topo: &Topology, node: NodeId, dst: NodeId) -> Option<LinkId> {
        self.refresh(topo, node);
        self.nodes[node.index()].routes[dst.index()].or(self.fallback[node.index()][dst.index()])
    }
}

impl RoutingAlgorithm for Spf {
    fn name(&self) -> &'static str {
        "spf"
    }

    fn elaboration_time(&self) -> f64 {
        LINK_STATE_ELABORATION_S
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
        let topo = net.topology();
        let costs = topo
            .out_links(node)
            .iter()
            .map(|&l| (topo.link(l).to, self.estimators[l.index()].close_window() as f64))
            .collect();
        let st = &mut self.nodes[node.index()];
        st.seq += 1;
        let ad = LinkStateAd {
            origin: node,
            seq: st.seq,
            costs,
        };
        st.db.accept(&ad);
        st.dirty = true;
        let bits = lsa_bits(topo.degree(node));
        reflood(net, node, None, &ad, bits);
        net.schedule_timer(self.params.broadcast_interval_s, node, 0);
    }

    fn on_routing_packet(&mut self, net: &mut Network, node: NodeId, via: LinkId, packet: Box<Packet>) -> Outcome {
        if let Payload::LinkState(ad) = &packet.payload {
            let st = &mut self.nodes[node.index()];
            if st.db.accept(ad) {
                st.dirty = true;
                reflood(net, node, Some(via), ad, packet.size_bits);
            }
        }
        Outcome::Consumed
    }

    fn select_next_hop(&mut self, net: &mut Network, node: NodeId, packet: &Packet, _via: Option<LinkId>) -> LinkId {
        self.route(net.topology(), node, packet.dst)
            .expect("topology is connected")
    }

    fn preferred_next_hop(&self, net: &Network, node: NodeId, dst: NodeId) -> Option<NodeId> {
        let topo = net.topology();
        let st = &self.nodes[node.index()];
        let link = if st.dirty {
            dijkstra(topo, node, |l| st.db.cost(topo, l)).first_link[dst.index()]
        } else {
            st.routes[dst.index()]
        };
        to_neighbor(topo, link.or(self.fallback[node.index()][dst.index()]))
    }
}
