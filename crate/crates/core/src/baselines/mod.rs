//! Competitor routing algorithms.

pub mod bf;
pub mod daemon;
pub mod ospf;
pub mod qrouting;
pub mod spf;

use crate::network::topology::{LinkId, NodeId, Topology};
use crate::routing::shortest_path::dijkstra;

pub use bf::{BellmanFord, BfParams};
pub use daemon::{Daemon, DaemonParams};
pub use ospf::{Ospf, OspfParams};
pub use qrouting::{PqRouting, PqrParams, QRouting, QrParams};
pub use spf::{Spf, SpfParams};

/// Size in bits of the reference packet used for static link costs.
pub const REFERENCE_PACKET_BITS: u64 = 4096;

/// All-pairs first links: `table[src][dst]`.
pub fn next_hop_table(topo: &Topology, cost: impl Fn(LinkId) -> f64) -> Vec<Vec<Option<LinkId>>> {
    topo.nodes()
        .map(|s| dijkstra(topo, s, &cost).first_link)
        .collect()
}

/// Minimum-hop routes, used before an adaptive algorithm has learned anything.
pub fn hop_table(topo: &Topology) -> Vec<Vec<Option<LinkId>>> {
    next_hop_table(topo, |_| 1.0)
}

pub(crate) fn to_neighbor(topo: &Topology, link: Option<LinkId>) -> Option<NodeId> {
    link.map(|l| topo.link(l).to)
}

/// Uniform random phase for a periodic broadcast timer.
pub(crate) fn broadcast_phase(rng: &mut impl rand::Rng, interval: f64) -> f64 {
    rng.random::<f64>() * interval
}
