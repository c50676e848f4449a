//! AntNet: forward ants sample paths through the data queues, backward ants
//! retrace them on the high-priority queues and reinforce the probabilistic
//! routing tables with a score derived from the observed trip times.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::engine::Time;
use crate::error::{Error, Result};
use crate::network::packet::{forward_ant_bits, AntMemory, Packet, PacketKind, Payload, Priority};
use crate::network::topology::{LinkId, NodeId, Topology};
use crate::network::Network;
use crate::routing::{Outcome, RoutingAlgorithm};

/// Processing time of an ant at a node.
pub const ANT_ELABORATION_S: f64 = 0.003;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AntNetParams {
    /// Interval between forward-ant launches at each node.
    pub launch_interval_s: f64,
    /// Weight of the queue-length heuristic in the ants' next-hop choice.
    pub alpha: f64,
    /// Learning rate of the exponential trip-time model.
    pub eta: f64,
    /// Window length as a fraction of the model's effective sample count.
    pub window_fraction: f64,
    pub z: f64,
    pub c1: f64,
    pub c2: f64,
    pub squash_a: f64,
    /// Exponent applied to table entries when forwarding data.
    pub data_exponent: f64,
}

impl Default for AntNetParams {
    fn default() -> Self {
        AntNetParams {
            launch_interval_s: 0.3,
            alpha: 0.3,
            eta: 0.005,
            window_fraction: 0.3,
            z: 1.70,
            c1: 0.7,
            c2: 0.3,
            squash_a: 10.0,
            data_exponent: 1.2,
        }
    }
}

impl AntNetParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, why: String| Err(Error::config(format!("antnet.{key}"), why));
        if !(self.launch_interval_s > 0.0) {
            return bad("launch_interval_s", "must be positive".into());
        }
        if !(self.alpha >= 0.0) || !self.alpha.is_finite() {
            return bad("alpha", "must be nonnegative".into());
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return bad("eta", "must lie in (0, 1]".into());
        }
        if !(self.window_fraction > 0.0 && self.window_fraction < 1.0) {
            return bad("window_fraction", "must lie in (0, 1)".into());
        }
        if !(self.z >= 0.0) || !self.z.is_finite() {
            return bad("z", "must be nonnegative".into());
        }
        if !(self.c1 >= 0.0 && self.c2 >= 0.0) || (self.c1 + self.c2 - 1.0).abs() > 1e-9 {
            return bad("c1", format!("c1 + c2 must equal 1, got {} + {}", self.c1, self.c2));
        }
        if !(self.squash_a > 0.0) || !self.squash_a.is_finite() {
            return bad("squash_a", "must be positive".into());
        }
        if !(self.data_exponent > 0.0) || !self.data_exponent.is_finite() {
            return bad("data_exponent", "must be positive".into());
        }
        Ok(())
    }

    /// Maximum observation window size, `round(5 c / eta)`.
    pub fn window_max(&self) -> u32 {
        ((5.0 * self.window_fraction / self.eta).round() as u32).max(1)
    }
}

/// Per-node probabilistic routing table: one row per destination, one entry
/// per neighbor slot.
#[derive(Debug, Clone, PartialEq)]
pub struct PheromoneTable {
    degree: usize,
    probs: Vec<f64>,
}

impl PheromoneTable {
    pub fn uniform(destinations: usize, degree: usize) -> Self {
        assert!(degree > 0);
        PheromoneTable {
            degree,
            probs: vec![1.0 / degree as f64; destinations * degree],
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn row(&self, dst: NodeId) -> &[f64] {
        let i = dst.index() * self.degree;
        &self.probs[i..i + self.degree]
    }

    /// Raises the entry of `slot` by `r` of its distance to 1 and shrinks the
    /// others proportionally, which keeps the row summing to 1.
    pub fn reinforce(&mut self, dst: NodeId, slot: usize, r: f64) {
        let i = dst.index() * self.degree;
        for (n, p) in self.probs[i..i + self.degree].iter_mut().enumerate() {
            if n == slot {
                *p += r * (1.0 - *p);
            } else {
                *p -= r * *p;
            }
        }
    }

    /// Slot with the largest probability; the lowest slot wins ties.
    pub fn argmax(&self, dst: NodeId) -> usize {
        let row = self.row(dst);
        let mut best = 0;
        for (i, &p) in row.iter().enumerate() {
            if p > row[best] {
                best = i;
            }
        }
        best
    }
}

/// Local model of trip times towards one destination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TripModel {
    pub mean: f64,
    pub var: f64,
    pub best: f64,
    /// Samples in the current observation window.
    pub window_count: u32,
}

impl TripModel {
    pub fn first(sample: f64) -> Self {
        TripModel {
            mean: sample,
            var: 0.0,
            best: sample,
            window_count: 1,
        }
    }

    /// Exponential mean and variance update (variance uses the updated mean),
    /// then the windowed best. The best restarts after `window_max` samples.
    pub fn update(&mut self, sample: f64, eta: f64, window_max: u32) {
        self.mean += eta * (sample - self.mean);
        self.var += eta * ((sample - self.mean).powi(2) - self.var);
        if self.window_count >= window_max {
            self.window_count = 0;
        }
        self.best = if self.window_count == 0 {
            sample
        } else {
            self.best.min(sample)
        };
        self.window_count += 1;
    }

    /// Upper end of the confidence interval, `mean + z * sigma / sqrt(|W|)`.
    pub fn upper(&self, z: f64) -> f64 {
        self.mean + z * self.var.sqrt() / (self.window_count.max(1) as f64).sqrt()
    }
}

/// Squash function `1 / (1 + exp(a / (x * n)))`.
pub fn squash(x: f64, a: f64, neighbors: usize) -> f64 {
    1.0 / (1.0 + (a / (x * neighbors as f64)).exp())
}

/// `ln(1 + e^y)` without overflow.
fn softplus(y: f64) -> f64 {
    if y > 30.0 {
        y + (-y).exp().ln_1p()
    } else {
        y.exp().ln_1p()
    }
}

/// Reinforcement for trip time `t` against `model`, in (0, 1].
pub fn score(t: f64, model: &TripModel, p: &AntNetParams, neighbors: usize) -> f64 {
    let i_inf = model.best;
    let i_sup = model.upper(p.z);
    // A trip faster than the best so far counts as the best.
    let second = if i_sup > i_inf {
        (i_sup - i_inf) / ((i_sup - i_inf) + (t - i_inf).max(0.0))
    } else if t > i_inf {
        0.0
    } else {
        1.0
    };
    let raw = (p.c1 * (i_inf / t) + p.c2 * second).clamp(f64::MIN_POSITIVE, 1.0);
    // s(raw) / s(1) evaluated in log space so tiny scores stay positive.
    let n = neighbors as f64;
    let ln_ratio = softplus(p.squash_a / n) - softplus(p.squash_a / (raw * n));
    ln_ratio.exp().clamp(f64::MIN_POSITIVE, 1.0)
}

/// Queue heuristic: `1 - q_n / sum(q)`, or `(n - 1) / n` for every link when
/// all queues are empty. The values always sum to `n - 1`.
pub fn queue_heuristic(queued_bits: &[u64]) -> Vec<f64> {
    let n = queued_bits.len();
    let total: u64 = queued_bits.iter().sum();
    if total == 0 {
        return vec![(n as f64 - 1.0) / n as f64; n];
    }
    queued_bits
        .iter()
        .map(|&q| 1.0 - q as f64 / total as f64)
        .collect()
}

/// Ant next-hop goodness over all neighbors: `(P + alpha l) / (1 + alpha (n - 1))`.
pub fn ant_goodness(row: &[f64], heuristic: &[f64], alpha: f64) -> Vec<f64> {
    let denom = 1.0 + alpha * (row.len() as f64 - 1.0);
    row.iter()
        .zip(heuristic)
        .map(|(p, l)| (p + alpha * l) / denom)
        .collect()
}

/// Data forwarding weights `P^exponent`, renormalized.
pub fn data_weights(row: &[f64], exponent: f64) -> Vec<f64> {
    let w: Vec<f64> = row.iter().map(|p| p.powf(exponent)).collect();
    let sum: f64 = w.iter().sum();
    w.into_iter().map(|x| x / sum).collect()
}

/// Destination probabilities proportional to observed flows, uniform over the
/// other nodes when nothing has been observed.
pub fn destination_probabilities(flows: &[u64], src: NodeId) -> Vec<f64> {
    let total: u64 = flows
        .iter()
        .enumerate()
        .filter(|&(d, _)| d != src.index())
        .map(|(_, &f)| f)
        .sum();
    let n = flows.len();
    (0..n)
        .map(|d| {
            if d == src.index() {
                0.0
            } else if total == 0 {
                1.0 / (n - 1) as f64
            } else {
                flows[d] as f64 / total as f64
            }
        })
        .collect()
}

/// Draws an index from nonnegative weights restricted to `allowed`. Falls back
/// to a uniform draw among the allowed indices when their weights are all zero.
fn draw<R: Rng + ?Sized>(rng: &mut R, weights: &[f64], allowed: impl Fn(usize) -> bool) -> usize {
    let total: f64 = (0..weights.len()).filter(|&i| allowed(i)).map(|i| weights[i]).sum();
    let candidates: Vec<usize> = (0..weights.len()).filter(|&i| allowed(i)).collect();
    debug_assert!(!candidates.is_empty());
    if !(total > 0.0) {
        return candidates[rng.random_range(0..candidates.len())];
    }
    let mut x = rng.random::<f64>() * total;
    for &i in &candidates {
        if x < weights[i] {
            return i;
        }
        x -= weights[i];
    }
    *candidates
        .iter()
        .rev()
        .find(|&&i| weights[i] > 0.0)
        .expect("positive total")
}

/// What happened when a forward ant reached a node it had already visited.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CycleOutcome {
    Continue,
    Die,
}

/// Removes the cycle closed by revisiting `stack[index]` at `elapsed` seconds
/// since launch. The revisited entry stays, stamped with the new time. The ant
/// dies when the cycle took more than half its age.
pub fn remove_cycle(stack: &mut Vec<(NodeId, Time)>, index: usize, elapsed: Time) -> CycleOutcome {
    let cycle = elapsed - stack[index].1;
    if cycle > elapsed / 2.0 {
        return CycleOutcome::Die;
    }
    stack.truncate(index + 1);
    stack[index].1 = elapsed;
    CycleOutcome::Continue
}

#[derive(Debug, Clone)]
struct NodeState {
    table: PheromoneTable,
    models: Vec<Option<TripModel>>,
    /// Data bits generated here per destination.
    flows: Vec<u64>,
}

pub struct AntNet {
    params: AntNetParams,
    window_max: u32,
    nodes: Vec<NodeState>,
    ants_launched: u64,
}

impl AntNet {
    pub fn new(topo: &Topology, params: AntNetParams) -> Result<Self> {
        params.validate()?;
        let n = topo.node_count();
        let nodes = topo
            .nodes()
            .map(|k| NodeState {
                table: PheromoneTable::uniform(n, topo.degree(k)),
                models: vec![None; n],
                flows: vec![0; n],
            })
            .collect();
        Ok(AntNet {
            window_max: params.window_max(),
            params,
            nodes,
            ants_launched: 0,
        })
    }

    pub fn params(&self) -> &AntNetParams {
        &self.params
    }

    pub fn table(&self, node: NodeId) -> &PheromoneTable {
        &self.nodes[node.index()].table
    }

    pub fn model(&self, node: NodeId, dst: NodeId) -> Option<&TripModel> {
        self.nodes[node.index()].models[dst.index()].as_ref()
    }

    pub fn ants_launched(&self) -> u64 {
        self.ants_launched
    }

    fn launch(&mut self, net: &mut Network, src: NodeId) {
        let probs = destination_probabilities(&self.nodes[src.index()].flows, src);
        let dst = NodeId(draw(net.ant_rng(), &probs, |_| true) as u32);
        let now = net.now();
        let ant = Packet::new(PacketKind::ForwardAnt, forward_ant_bits(0), src, dst, now)
            .with_payload(Payload::Ant(AntMemory {
                stack: vec![(src, 0.0)],
            }));
        self.ants_launched += 1;
        let link = self.forward_choice(net, src, &ant);
        net.send(link, ant);
    }

    /// Picks the next link for a forward ant at `node`, preferring unvisited neighbors.
    fn forward_choice(&self, net: &mut Network, node: NodeId, ant: &Packet) -> LinkId {
        let links = net.topology().out_links(node).to_vec();
        let queues: Vec<u64> = links
            .iter()
            .map(|&l| net.queued_bits(l, Priority::Low))
            .collect();
        let table = &self.nodes[node.index()].table;
        let goodness = ant_goodness(table.row(ant.dst), &queue_heuristic(&queues), self.params.alpha);
        let stack = &ant.ant().stack;
        let topo = net.topology();
        let unvisited: Vec<bool> = links
            .iter()
            .map(|&l| {
                let to = topo.link(l).to;
                !stack.iter().any(|&(v, _)| v == to)
            })
            .collect();
        let any_unvisited = unvisited.iter().any(|&u| u);
        let slot = draw(net.ant_rng(), &goodness, |i| !any_unvisited || unvisited[i]);
        links[slot]
    }

    fn on_forward_ant(&mut self, net: &mut Network, node: NodeId, mut ant: Box<Packet>) -> Outcome {
        let now = net.now();
        let elapsed = now - ant.created_at;
        let stack = &mut ant.ant_mut().stack;
        match stack.iter().position(|&(v, _)| v == node) {
            Some(i) => {
                if remove_cycle(stack, i, elapsed) == CycleOutcome::Die {
                    return Outcome::Killed;
                }
            }
            None => stack.push((node, elapsed)),
        }
        if node == ant.dst {
            let back = Packet::new(PacketKind::BackwardAnt, ant.size_bits, node, ant.src, now)
                .with_payload(std::mem::replace(&mut ant.payload, Payload::None));
            let stack = &back.ant().stack;
            let prev = stack[stack.len() - 2].0;
            let link = net
                .topology()
                .link_between(node, prev)
                .expect("stack holds adjacent nodes");
            net.send(link, back);
            return Outcome::Consumed;
        }
        ant.size_bits = forward_ant_bits(ant.ant().stack.len() - 1);
        let link = self.forward_choice(net, node, &ant);
        Outcome::Forward(link, ant)
    }

    fn on_backward_ant(&mut self, net: &mut Network, node: NodeId, ant: Box<Packet>) -> Outcome {
        let stack = &ant.ant().stack;
        let i = stack
            .iter()
            .position(|&(v, _)| v == node)
            .expect("backward ant visits only stacked nodes");
        let topo = net.topology();
        let from = stack[i + 1].0;
        let slot = topo.neighbor_slot(node, from).expect("stack holds adjacent nodes");
        let degree = topo.degree(node);
        let t_here = stack[i].1;
        let last = stack.len() - 1;
        let state = &mut self.nodes[node.index()];
        for (j, &(d, t)) in stack.iter().enumerate().skip(i + 1) {
            let trip = t - t_here;
            if !(trip > 0.0) {
                continue;
            }
            let model = &mut state.models[d.index()];
            if j != last {
                if let Some(m) = model {
                    if trip >= m.upper(self.params.z) {
                        continue;
                    }
                }
            }
            let m = match model {
                Some(m) => {
                    m.update(trip, self.params.eta, self.window_max);
                    m
                }
                None => model.insert(TripModel::first(trip)),
            };
            let r = score(trip, m, &self.params, degree);
            state.table.reinforce(d, slot, r);
        }
        if i == 0 {
            return Outcome::Consumed;
        }
        let prev = stack[i - 1].0;
        let link = topo.link_between(node, prev).expect("stack holds adjacent nodes");
        Outcome::Forward(link, ant)
    }
}

impl RoutingAlgorithm for AntNet {
    fn name(&self) -> &'static str {
        "antnet"
    }

    fn elaboration_time(&self) -> f64 {
        ANT_ELABORATION_S
    }

    fn start(&mut self, net: &mut Network) {
        let dt = self.params.launch_interval_s;
        if !dt.is_finite() {
            return;
        }
        for node in net.topology().nodes().collect::<Vec<_>>() {
            let phase = net.phase_rng().random::<f64>() * dt;
            net.schedule_timer(phase, node, 0);
        }
    }

    fn on_timer(&mut self, net: &mut Network, node: NodeId, _tag: u64) {
        self.launch(net, node);
        net.schedule_timer(self.params.launch_interval_s, node, 0);
    }

    fn on_data_generated(&mut self, _net: &mut Network, node: NodeId, dst: NodeId, bits: u64) {
        self.nodes[node.index()].flows[dst.index()] += bits;
    }

    fn select_next_hop(
        &mut self,
        net: &mut Network,
        node: NodeId,
        packet: &Packet,
        arrived_via: Option<LinkId>,
    ) -> LinkId {
        let topo = net.topology();
        let links = topo.out_links(node);
        let back = match arrived_via {
            Some(l) if links.len() >= 2 => Some(topo.link(l).reverse),
            _ => None,
        };
        let links = links.to_vec();
        let weights = data_weights(
            self.nodes[node.index()].table.row(packet.dst),
            self.params.data_exponent,
        );
        let slot = draw(net.data_rng(), &weights, |i| Some(links[i]) != back);
        links[slot]
    }

    fn on_routing_packet(
        &mut self,
        net: &mut Network,
        node: NodeId,
        _via: LinkId,
        packet: Box<Packet>,
    ) -> Outcome {
        match packet.kind {
            PacketKind::ForwardAnt => self.on_forward_ant(net, node, packet),
            PacketKind::BackwardAnt => self.on_backward_ant(net, node, packet),
            _ => Outcome::Consumed,
        }
    }

    fn preferred_next_hop(&self, net: &Network, node: NodeId, dst: NodeId) -> Option<NodeId> {
        if node == dst {
            return None;
        }
        let slot = self.nodes[node.index()].table.argmax(dst);
        net.topology().neighbors(node).nth(slot)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn window_max_at_defaults() {
        assert_eq!(AntNetParams::default().window_max(), 300);
    }

    #[test]
    fn destination_choice_follows_flows() {
        let flows = [0, 0, 300, 100];
        let p = destination_probabilities(&flows, NodeId(0));
        assert_eq!(p, vec![0.0, 0.0, 0.75, 0.25]);
        let p = destination_probabilities(&[0; 8], NodeId(0));
        assert_eq!(p[0], 0.0);
        assert!(p[1..].iter().all(|&x| close(x, 1.0 / 7.0, 1e-15)));
    }

    #[test]
    fn goodness_by_hand() {
        // P = 0.6, l = 0.8, alpha = 0.3, three neighbors.
        let g = ant_goodness(&[0.6, 0.2, 0.2], &[0.8, 0.6, 0.6], 0.3);
        assert!(close(g[0], 0.525, 1e-12));
        let g = ant_goodness(&[0.6, 0.4], &[0.3, 0.7], 0.0);
        assert_eq!(g, vec![0.6, 0.4]);
    }

    #[test]
    fn heuristic_by_hand() {
        assert_eq!(queue_heuristic(&[1000, 3000]), vec![0.75, 0.25]);
        let idle = queue_heuristic(&[0, 0, 0]);
        assert!(idle.iter().all(|&l| close(l, 2.0 / 3.0, 1e-15)));
    }

    #[test]
    fn model_update_by_hand() {
        let mut m = TripModel::first(1.0);
        m.update(2.0, 0.005, 300);
        assert!(close(m.mean, 1.005, 1e-12));
        assert!(close(m.var, 0.005 * (0.995f64).powi(2), 1e-12));
        assert_eq!(m.best, 1.0);
        assert_eq!(m.window_count, 2);
    }

    #[test]
    fn window_best_resets_on_wrap() {
        let mut m = TripModel::first(1.0);
        m.update(5.0, 0.1, 3);
        m.update(6.0, 0.1, 3);
        assert_eq!((m.best, m.window_count), (1.0, 3));
        m.update(7.0, 0.1, 3);
        assert_eq!((m.best, m.window_count), (7.0, 1));
        m.update(4.0, 0.1, 3);
        assert_eq!(m.best, 4.0);
    }

    #[test]
    fn reinforcement_by_hand() {
        let mut t = PheromoneTable::uniform(1, 2);
        t.probs = vec![0.4, 0.6];
        t.reinforce(NodeId(0), 0, 0.5);
        assert!(close(t.row(NodeId(0))[0], 0.7, 1e-15));
        assert!(close(t.row(NodeId(0))[1], 0.3, 1e-15));
        let before = t.clone();
        t.reinforce(NodeId(0), 1, 0.0);
        assert_eq!(t, before);
    }

    #[test]
    fn score_examples() {
        let p = AntNetParams::default();
        let best = TripModel {
            mean: 1.0,
            var: 0.0,
            best: 1.0,
            window_count: 1,
        };
        assert!(close(score(1.0, &best, &p, 3), 1.0, 1e-12));

        // W_best = 1, T = 2, I_sup = 3 gives raw 0.55 before squashing.
        let m = TripModel {
            mean: 2.0,
            var: 1.0 / (p.z * p.z),
            best: 1.0,
            window_count: 1,
        };
        assert!(close(m.upper(p.z), 3.0, 1e-12));
        let expected = squash(0.55, 10.0, 4) / squash(1.0, 10.0, 4);
        assert!(close(score(2.0, &m, &p, 4), expected, 1e-9));
        assert!(close(expected, 0.1385, 1e-4));
    }

    #[test]
    fn degenerate_interval() {
        let p = AntNetParams::default();
        let m = TripModel {
            mean: 1.0,
            var: 0.0,
            best: 1.0,
            window_count: 5,
        };
        // I_sup == I_inf: second term is 0 above the best and 1 at it.
        let r = score(2.0, &m, &p, 2);
        let raw: f64 = 0.7 * 0.5;
        assert!(close(r, squash(raw, 10.0, 2) / squash(1.0, 10.0, 2), 1e-12));
        assert!(close(score(1.0, &m, &p, 2), 1.0, 1e-12));
    }

    #[test]
    fn squash_ratio_at_one() {
        for n in 1..10 {
            assert_eq!(squash(1.0, 10.0, n) / squash(1.0, 10.0, n), 1.0);
        }
    }

    #[test]
    fn power_remap() {
        let w = data_weights(&[0.5, 0.5], 1.2);
        assert!(close(w[0], 0.5, 1e-15));
        let w = data_weights(&[0.9, 0.1], 1.2);
        assert!(close(w[0], 0.9331, 1e-4) && close(w[1], 0.0669, 1e-4));
        let w = data_weights(&[0.7, 0.2, 0.1], 1.0);
        assert!(close(w[0], 0.7, 1e-15) && close(w[2], 0.1, 1e-15));
    }

    #[test]
    fn cycles() {
        let n = |i| NodeId(i);
        // Age 10 s, cycle of 6 s: destroyed.
        let mut s = vec![(n(1), 0.0), (n(2), 4.0), (n(3), 7.0)];
        assert_eq!(remove_cycle(&mut s, 1, 10.0), CycleOutcome::Die);
        // Age 10 s, cycle of 4 s: popped, the ant goes on.
        let mut s = vec![(n(1), 0.0), (n(2), 6.0), (n(3), 8.0)];
        assert_eq!(remove_cycle(&mut s, 1, 10.0), CycleOutcome::Continue);
        assert_eq!(s, vec![(n(1), 0.0), (n(2), 10.0)]);
    }

    #[test]
    fn draw_respects_mask_and_zero_weights() {
        let mut rng = crate::engine::RngStreams::new(9).stream(crate::engine::Stream::DataRouting);
        for _ in 0..100 {
            assert_eq!(draw(&mut rng, &[0.9, 0.1], |i| i == 1), 1);
            let i = draw(&mut rng, &[0.0, 0.0, 0.0], |i| i != 0);
            assert!(i == 1 || i == 2);
        }
    }

    #[test]
    fn rejects_bad_params() {
        let p = AntNetParams {
            c1: 0.6,
            ..AntNetParams::default()
        };
        assert!(p.validate().unwrap_err().to_string().contains("antnet.c1"));
        let p = AntNetParams {
            launch_interval_s: f64::INFINITY,
            ..AntNetParams::default()
        };
        assert!(p.validate().is_ok());
    }
}
