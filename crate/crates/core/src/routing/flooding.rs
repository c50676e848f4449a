use std::collections::VecDeque;

use crate::network::packet::LinkStateAd;
use crate::network::topology::{LinkId, NodeId, Topology};

/// One node's replica of the network map, keyed by advertisement origin.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkStateDb {
    newest: Vec<Option<u64>>,
    costs: Vec<Vec<(NodeId, f64)>>,
}

impl LinkStateDb {
    pub fn new(node_count: usize) -> Self {
        LinkStateDb {
            newest: vec![None; node_count],
            costs: vec![Vec::new(); node_count],
        }
    }

    /// Stores `ad` if it is newer than what is known about its origin.
    /// Returns false for duplicates and stale copies, which are not re-flooded.
    pub fn accept(&mut self, ad: &LinkStateAd) -> bool {
        let o = ad.origin.index();
        if self.newest[o].is_some_and(|s| s >= ad.seq) {
            return false;
        }
        self.newest[o] = Some(ad.seq);
        self.costs[o].clone_from(&ad.costs);
        true
    }

    pub fn newest_seq(&self, origin: NodeId) -> Option<u64> {
        self.newest[origin.index()]
    }

    /// Cost of the directed link as advertised by its tail; infinite if unknown.
    pub fn cost(&self, topo: &Topology, link: LinkId) -> f64 {
        let l = topo.link(link);
        self.costs[l.from.index()]
            .iter()
            .find(|(n, _)| *n == l.to)
            .map_or(f64::INFINITY, |&(_, c)| c)
    }
}

/// Result of propagating one advertisement to quiescence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FloodTrace {
    /// Times each node accepted the advertisement as new.
    pub accepted: Vec<u32>,
    /// Copies put on links.
    pub transmissions: usize,
}

/// Floods `ad` from its origin over `topo`, given the current databases,
/// using the same forwarding rule as the link-state protocol: a node that
/// accepts a new advertisement forwards it on every link except the one it
/// came from.
pub fn flood(topo: &Topology, dbs: &mut [LinkStateDb], ad: &LinkStateAd) -> FloodTrace {
    let mut accepted = vec![0u32; topo.node_count()];
    let mut transmissions = 0;
    let mut pending: VecDeque<(NodeId, Option<LinkId>)> = VecDeque::new();
    pending.push_back((ad.origin, None));
    while let Some((node, via)) = pending.pop_front() {
        if !dbs[node.index()].accept(ad) {
            continue;
        }
        accepted[node.index()] += 1;
        for &l in topo.out_links(node) {
            if via.is_some_and(|v| topo.link(v).reverse == l) {
                continue;
            }
            transmissions += 1;
            pending.push_back((topo.link(l).to, Some(l)));
        }
    }
    FloodTrace {
        accepted,
        transmissions,
    }
}
