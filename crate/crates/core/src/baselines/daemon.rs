//! An idealized upper bound: at every hop the node reads the instantaneous
//! queue state of the whole network and routes on a shortest path whose link
//! costs are propagation, transmission and a blend of current and averaged
//! queueing delay. No routing packets ever exist.

use serde::{Deserialize, Serialize};

use super::to_neighbor;
use crate::error::{Error, Result};
use crate::network::packet::Packet;
use crate::network::topology::{LinkId, NodeId, Topology};
use crate::network::Network;
use crate::routing::shortest_path::dijkstra;
use crate::routing::RoutingAlgorithm;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DaemonParams {
    /// Weight of the instantaneous queue against its running average.
    pub alpha: f64,
    /// Decay of the running average per read.
    pub decay: f64,
}

impl Default for DaemonParams {
    fn default() -> Self {
        DaemonParams { alpha: 0.4, decay: 0.9 }
    }
}

impl DaemonParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::config("daemon.alpha", "must lie in [0, 1]"));
        }
        if !(0.0..1.0).contains(&self.decay) {
            return Err(Error::config("daemon.decay", "must lie in [0, 1)"));
        }
        Ok(())
    }
}

/// Link cost for a packet of `packet_bits` given the current and averaged
/// waiting bits.
pub fn link_cost(
    prop_delay_s: f64,
    bandwidth_bps: f64,
    packet_bits: f64,
    queued_bits: f64,
    avg_queued_bits: f64,
    alpha: f64,
) -> f64 {
    prop_delay_s + packet_bits / bandwidth_bps + ((1.0 - alpha) * queued_bits + alpha * avg_queued_bits) / bandwidth_bps
}

pub struct Daemon {
    params: DaemonParams,
    avg_queue: Vec<f64>,
}

impl Daemon {
    pub fn new(topo: &Topology, params: DaemonParams) -> Result<Self> {
        params.validate()?;
        Ok(Daemon {
            params,
            avg_queue: vec![0.0; topo.link_count()],
        })
    }

    fn costs(&self, net: &Network, packet_bits: f64) -> Vec<f64> {
        let topo = net.topology();
        (0..topo.link_count())
            .map(|i| {
                let l = LinkId(i as u32);
                let link = topo.link(l);
                link_cost(
                    link.prop_delay_s,
                    link.bandwidth_bps,
                    packet_bits,
                    net.waiting_bits(l) as f64,
                    self.avg_queue[i],
                    self.params.alpha,
                )
            })
            .collect()
    }

    fn route(&self, net: &Network, node: NodeId, dst: NodeId, packet_bits: f64) -> Option<LinkId> {
        let costs = self.costs(net, packet_bits);
        dijkstra(net.topology(), node, |l| costs[l.index()]).first_link[dst.index()]
    }
}

impl RoutingAlgorithm for Daemon {
    fn name(&self) -> &'static str {
        "daemon"
    }

    fn elaboration_time(&self) -> f64 {
        0.0
    }

    fn start(&mut self, _net: &mut Network) {}

    fn select_next_hop(&mut self, net: &mut Network, node: NodeId, packet: &Packet, _via: Option<LinkId>) -> LinkId {
        let link = self
            .route(net, node, packet.dst, packet.size_bits as f64)
            .expect("topology is connected");
        let d = self.params.decay;
        for (i, avg) in self.avg_queue.iter_mut().enumerate() {
            *avg = d * *avg + (1.0 - d) * net.waiting_bits(LinkId(i as u32)) as f64;
        }
        link
    }

    fn preferred_next_hop(&self, net: &Network, node: NodeId, dst: NodeId) -> Option<NodeId> {
        to_neighbor(net.topology(), self.route(net, node, dst, super::REFERENCE_PACKET_BITS as f64))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cost_by_hand() {
        // 4 ms + 4096/1.5e6 + (0.6 * 30000 + 0.4 * 10000) / 1.5e6
        let c = link_cost(0.004, 1.5e6, 4096.0, 30_000.0, 10_000.0, 0.4);
        let expected = 0.004 + 4096.0 / 1.5e6 + 22_000.0 / 1.5e6;
        assert!((c - expected).abs() < 1e-15);
    }

    #[test]
    fn cost_with_both_queue_terms() {
        let c = link_cost(0.001, 1.5e6, 4096.0, 8192.0, 4096.0, 0.4);
        assert!((c - 0.0080997).abs() < 1e-7, "{c}");
    }

    #[test]
    fn empty_network_cost_is_static() {
        let c = link_cost(0.001, 10e6, 4096.0, 0.0, 0.0, 0.4);
        assert!((c - (0.001 + 4096.0 / 10e6)).abs() < 1e-15);
    }
}
