use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::network::topology::{LinkId, NodeId, Topology};

/// Single-source shortest paths with the first link of each chosen path.
#[derive(Debug, Clone, PartialEq)]
pub struct ShortestPaths {
    pub dist: Vec<f64>,
    pub first_link: Vec<Option<LinkId>>,
}

impl ShortestPaths {
    pub fn next_hop(&self, topo: &Topology, dst: NodeId) -> Option<NodeId> {
        self.first_link[dst.index()].map(|l| topo.link(l).to)
    }
}

fn nearly_equal(a: f64, b: f64) -> bool {
    a.is_finite() && b.is_finite() && (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

#[derive(PartialEq)]
struct Entry {
    dist: f64,
    node: NodeId,
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

/// Dijkstra from `src` with per-link costs. Links whose cost is not finite are
/// treated as absent; unreachable nodes get distance `f64::INFINITY`. Among
/// equal-cost paths the one whose first hop has the smallest neighbor id wins.
pub fn dijkstra(topo: &Topology, src: NodeId, mut cost: impl FnMut(LinkId) -> f64) -> ShortestPaths {
    let n = topo.node_count();
    let mut dist = vec![f64::INFINITY; n];
    let mut first_link: Vec<Option<LinkId>> = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[src.index()] = 0.0;
    heap.push(Entry { dist: 0.0, node: src });
    let first_hop_id = |fl: &[Option<LinkId>], v: usize| fl[v].map(|l| topo.link(l).to);
    while let Some(Entry { dist: du, node: u }) = heap.pop() {
        if done[u.index()] || du > dist[u.index()] {
            continue;
        }
        done[u.index()] = true;
        for &l in topo.out_links(u) {
            let c = cost(l);
            if !c.is_finite() {
                continue;
            }
            debug_assert!(c >= 0.0, "negative link cost");
            let v = topo.link(l).to;
            if done[v.index()] {
                continue;
            }
            let nd = du + c;
            let via = if u == src { Some(l) } else { first_link[u.index()] };
            let dv = dist[v.index()];
            let better = if nearly_equal(nd, dv) {
                via.map(|x| topo.link(x).to) < first_hop_id(&first_link, v.index())
            } else {
                nd < dv
            };
            if better {
                let decreased = nd < dv;
                dist[v.index()] = if decreased { nd } else { dv };
                first_link[v.index()] = via;
                if decreased {
                    heap.push(Entry { dist: nd, node: v });
                }
            }
        }
    }
    ShortestPaths { dist, first_link }
}

/// Reference Bellman-Ford relaxation over the whole graph.
pub fn bellman_ford(topo: &Topology, src: NodeId, cost: impl Fn(LinkId) -> f64) -> Vec<f64> {
    let n = topo.node_count();
    let mut dist = vec![f64::INFINITY; n];
    dist[src.index()] = 0.0;
    for _ in 0..n {
        let mut changed = false;
        for (i, l) in topo.links().iter().enumerate() {
            let c = cost(LinkId(i as u32));
            let nd = dist[l.from.index()] + c;
            if nd < dist[l.to.index()] {
                dist[l.to.index()] = nd;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    dist
}
