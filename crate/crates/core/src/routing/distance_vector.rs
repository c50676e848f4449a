use crate::network::topology::{NodeId, Topology};

/// Distance-vector state of one node: the last vector heard from each
/// neighbor, the current cost of each outgoing link, and the resulting
/// best distance and next hop per destination.
#[derive(Debug, Clone, PartialEq)]
pub struct CostTable {
    node: NodeId,
    neighbors: Vec<NodeId>,
    /// `vectors[slot][d]`: distance from neighbor `slot` to `d` as last advertised.
    vectors: Vec<Vec<f64>>,
    link_costs: Vec<f64>,
    dist: Vec<f64>,
    next: Vec<Option<usize>>,
}

impl CostTable {
    /// Before any vector arrives, a neighbor is only known to reach itself.
    pub fn new(topo: &Topology, node: NodeId, link_costs: Vec<f64>) -> Self {
        let neighbors: Vec<NodeId> = topo.neighbors(node).collect();
        assert_eq!(neighbors.len(), link_costs.len());
        let n = topo.node_count();
        let vectors = neighbors
            .iter()
            .map(|j| {
                let mut v = vec![f64::INFINITY; n];
                v[j.index()] = 0.0;
                v
            })
            .collect();
        let mut t = CostTable {
            node,
            neighbors,
            vectors,
            link_costs,
            dist: vec![f64::INFINITY; n],
            next: vec![None; n],
        };
        t.recompute();
        t
    }

    pub fn node(&self) -> NodeId {
        self.node
    }

    pub fn neighbors(&self) -> &[NodeId] {
        &self.neighbors
    }

    /// Replaces the stored vector of the neighbor in `slot` and re-derives routes.
    pub fn merge(&mut self, slot: usize, vector: &[f64]) {
        self.vectors[slot].copy_from_slice(vector);
        self.recompute();
    }

    pub fn set_link_costs(&mut self, costs: &[f64]) {
        self.link_costs.copy_from_slice(costs);
        self.recompute();
    }

    pub fn link_cost(&self, slot: usize) -> f64 {
        self.link_costs[slot]
    }

    /// Best route per destination: arg min over neighbors of link cost plus
    /// advertised distance, smallest neighbor id on ties.
    fn recompute(&mut self) {
        for d in 0..self.dist.len() {
            if d == self.node.index() {
                self.dist[d] = 0.0;
                self.next[d] = None;
                continue;
            }
            let mut best = f64::INFINITY;
            let mut arg = None;
            for (slot, v) in self.vectors.iter().enumerate() {
                let c = self.link_costs[slot] + v[d];
                if c < best {
                    best = c;
                    arg = Some(slot);
                }
            }
            self.dist[d] = best;
            self.next[d] = arg;
        }
    }

    pub fn distance(&self, dst: NodeId) -> f64 {
        self.dist[dst.index()]
    }

    /// Slot of the chosen neighbor towards `dst`.
    pub fn next_slot(&self, dst: NodeId) -> Option<usize> {
        self.next[dst.index()]
    }

    pub fn next_hop(&self, dst: NodeId) -> Option<NodeId> {
        self.next_slot(dst).map(|s| self.neighbors[s])
    }

    /// The vector this node advertises.
    pub fn vector(&self) -> &[f64] {
        &self.dist
    }
}

/// Runs synchronous exchange rounds with static link costs until no table
/// changes, returning the converged tables and the number of rounds.
pub fn converge(topo: &Topology, cost: impl Fn(NodeId, NodeId) -> f64) -> (Vec<CostTable>, usize) {
    let mut tables: Vec<CostTable> = topo
        .nodes()
        .map(|u| {
            let costs = topo.neighbors(u).map(|v| cost(u, v)).collect();
            CostTable::new(topo, u, costs)
        })
        .collect();
    let mut rounds = 0;
    loop {
        rounds += 1;
        let snapshot: Vec<Vec<f64>> = tables.iter().map(|t| t.vector().to_vec()).collect();
        for t in &mut tables {
            for slot in 0..t.neighbors.len() {
                let j = t.neighbors[slot];
                t.vectors[slot].copy_from_slice(&snapshot[j.index()]);
            }
            t.recompute();
        }
        let stable = tables
            .iter()
            .zip(&snapshot)
            .all(|(t, old)| t.vector() == &old[..]);
        if stable || rounds > topo.node_count() + 1 {
            return (tables, rounds);
        }
    }
}
