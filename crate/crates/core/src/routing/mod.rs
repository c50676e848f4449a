//! The interface shared by all routing algorithms and the building blocks
//! several of them reuse.

pub mod distance_vector;
pub mod flooding;
pub mod link_cost;
pub mod shortest_path;

use crate::network::packet::Packet;
use crate::network::topology::{LinkId, NodeId};
use crate::network::{Network, Transmission};

/// Fate of a routing packet after its handler ran at a node.
#[derive(Debug)]
pub enum Outcome {
    /// Continue on the given outgoing link.
    Forward(LinkId, Box<Packet>),
    /// Absorbed at this node.
    Consumed,
    /// Destroyed before reaching its destination (an ant caught in a long cycle).
    Killed,
}

pub trait RoutingAlgorithm {
    fn name(&self) -> &'static str;

    /// Processing delay applied to this algorithm's routing packets at each node.
    fn elaboration_time(&self) -> f64;

    /// Called once at t = 0, before warmup.
    fn start(&mut self, net: &mut Network);

    /// Chooses the outgoing link for a data packet at `node`. `arrived_via` is
    /// `None` at the source.
    fn select_next_hop(
        &mut self,
        net: &mut Network,
        node: NodeId,
        packet: &Packet,
        arrived_via: Option<LinkId>,
    ) -> LinkId;

    #[allow(clippy::boxed_local)]
    fn on_routing_packet(
        &mut self,
        _net: &mut Network,
        _node: NodeId,
        _via: LinkId,
        _packet: Box<Packet>,
    ) -> Outcome {
        Outcome::Consumed
    }

    fn on_timer(&mut self, _net: &mut Network, _node: NodeId, _tag: u64) {}

    /// A session at `node` produced `bits` of data for `dst`.
    fn on_data_generated(&mut self, _net: &mut Network, _node: NodeId, _dst: NodeId, _bits: u64) {}

    /// A data packet reached `node` over `via`, before any delivery or forwarding.
    fn on_data_arrival(&mut self, _net: &mut Network, _node: NodeId, _via: LinkId, _packet: &Packet) {}

    /// A packet finished transmission on a link.
    fn on_transmission(&mut self, _net: &mut Network, _done: &Transmission) {}

    fn on_measurement_start(&mut self, _net: &mut Network) {}

    /// The neighbor this algorithm currently prefers at `node` towards `dst`.
    fn preferred_next_hop(&self, net: &Network, node: NodeId, dst: NodeId) -> Option<NodeId>;
}
