//! Static link-state routing: link cost is the delay of a reference packet,
//! tables are computed once and never change. Advertisements are still
//! flooded periodically, so the protocol has a (small) overhead.

use serde::{Deserialize, Serialize};

use super::{broadcast_phase, next_hop_table, to_neighbor, REFERENCE_PACKET_BITS};
use crate::error::{Error, Result};
use crate::network::packet::{LinkStateAd, Packet, PacketKind, Payload};
use crate::network::topology::{LinkId, NodeId, Topology};
use crate::network::Network;
use crate::routing::flooding::LinkStateDb;
use crate::routing::{Outcome, RoutingAlgorithm};

pub const LINK_STATE_ELABORATION_S: f64 = 0.006;

/// Link-state advertisement size in bits for a node with `degree` neighbors.
pub fn lsa_bits(degree: usize) -> u64 {
    (64 + 8 * degree as u64) * 8
}

/// Delay of the reference packet over the link.
pub fn static_cost(topo: &Topology, link: LinkId) -> f64 {
    let l = topo.link(link);
    l.prop_delay_s + REFERENCE_PACKET_BITS as f64 / l.bandwidth_bps
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OspfParams {
    pub broadcast_interval_s: f64,
}

impl Default for OspfParams {
    fn default() -> Self {
        OspfParams {
            broadcast_interval_s: 30.0,
        }
    }
}

impl OspfParams {
    pub fn validate(&self) -> Result<()> {
        if self.broadcast_interval_s > 0.0 {
            Ok(())
        } else {
            Err(Error::config("ospf.broadcast_interval_s", "must be positive"))
        }
    }
}

/// Forwards a newly accepted advertisement on every link except the arrival one.
pub(crate) fn reflood(net: &mut Network, node: NodeId, via: Option<LinkId>, ad: &LinkStateAd, bits: u64) {
    let topo = net.topology();
    let skip = via.map(|v| topo.link(v).reverse);
    let links: Vec<LinkId> = topo
        .out_links(node)
        .iter()
        .copied()
        .filter(|&l| Some(l) != skip)
        .collect();
    let now = net.now();
    for l in links {
        let to = net.topology().link(l).to;
        let p = Packet::new(PacketKind::RoutingInfo, bits, node, to, now)
            .with_payload(Payload::LinkState(ad.clone()));
        net.send(l, p);
    }
}

pub struct Ospf {
    params: OspfParams,
    table: Vec<Vec<Option<LinkId>>>,
    dbs: Vec<LinkStateDb>,
    seq: Vec<u64>,
}

impl Ospf {
    pub fn new(topo: &Topology, params: OspfParams) -> Result<Self> {
        params.validate()?;
        Ok(Ospf {
            params,
            table: next_hop_table(topo, |l| static_cost(topo, l)),
            dbs: vec![LinkStateDb::new(topo.node_count()); topo.node_count()],
            seq: vec![0; topo.node_count()],
        })
    }
}

impl RoutingAlgorithm for Ospf {
    fn name(&self) -> &'static str {
        "ospf"
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

    fn on_timer(&mut self, net: &mut Network, node: NodeId, _tag: u64) {
        self.seq[node.index()] += 1;
        let topo = net.topology();
        let ad = LinkStateAd {
            origin: node,
            seq: self.seq[node.index()],
            costs: topo
                .out_links(node)
                .iter()
                .map(|&l| (topo.link(l).to, static_cost(topo, l)))
                .collect(),
        };
        let bits = lsa_bits(topo.degree(node));
        self.dbs[node.index()].accept(&ad);
        reflood(net, node, None, &ad, bits);
        net.schedule_timer(self.params.broadcast_interval_s, node, 0);
    }

    fn on_routing_packet(&mut self, net: &mut Network, node: NodeId, via: LinkId, packet: Box<Packet>) -> Outcome {
        if let Payload::LinkState(ad) = &packet.payload {
            if self.dbs[node.index()].accept(ad) {
                reflood(net, node, Some(via), ad, packet.size_bits);
            }
        }
        Outcome::Consumed
    }

    fn select_next_hop(&mut self, _net: &mut Network, node: NodeId, packet: &Packet, _via: Option<LinkId>) -> LinkId {
        self.table[node.index()][packet.dst.index()].expect("topology is connected")
    }

    fn preferred_next_hop(&self, net: &Network, node: NodeId, dst: NodeId) -> Option<NodeId> {
        to_neighbor(net.topology(), self.table[node.index()][dst.index()])
    }
}
