use serde::{Deserialize, Serialize};

use crate::engine::Time;
use crate::network::topology::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PacketKind {
    Data,
    ForwardAnt,
    BackwardAnt,
    RoutingInfo,
}

impl PacketKind {
    pub const ALL: [PacketKind; 4] = [
        PacketKind::Data,
        PacketKind::ForwardAnt,
        PacketKind::BackwardAnt,
        PacketKind::RoutingInfo,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Data and forward ants share the low-priority queues.
    pub fn priority(self) -> Priority {
        match self {
            PacketKind::Data | PacketKind::ForwardAnt => Priority::Low,
            PacketKind::BackwardAnt | PacketKind::RoutingInfo => Priority::High,
        }
    }

    pub fn is_routing(self) -> bool {
        self != PacketKind::Data
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Priority {
    High,
    Low,
}

/// Memory carried by an ant: visited nodes with the time elapsed since launch
/// when the ant was at each of them.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AntMemory {
    pub stack: Vec<(NodeId, Time)>,
}

/// A link-state advertisement: the origin's cost towards each neighbor.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkStateAd {
    pub origin: NodeId,
    pub seq: u64,
    pub costs: Vec<(NodeId, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    None,
    Ant(AntMemory),
    DistanceVector(Vec<f64>),
    LinkState(LinkStateAd),
    /// Q-routing feedback sent from `from` back to the previous hop.
    QFeedback {
        dst: NodeId,
        from: NodeId,
        estimate: f64,
        hop_time: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Packet {
    pub id: u64,
    pub kind: PacketKind,
    pub size_bits: u64,
    pub src: NodeId,
    pub dst: NodeId,
    pub created_at: Time,
    /// Session that produced a data packet.
    pub session: Option<u32>,
    /// Links traversed so far.
    pub hops: u32,
    /// When the packet was handed to its current output port.
    pub enqueued_at: Time,
    /// When its last bit left the previous node.
    pub last_tx_end: Time,
    pub payload: Payload,
}

impl Packet {
    pub fn new(kind: PacketKind, size_bits: u64, src: NodeId, dst: NodeId, now: Time) -> Self {
        assert!(size_bits > 0, "packets must have a positive size");
        Packet {
            id: 0,
            kind,
            size_bits,
            src,
            dst,
            created_at: now,
            session: None,
            hops: 0,
            enqueued_at: now,
            last_tx_end: now,
            payload: Payload::None,
        }
    }

    pub fn with_payload(mut self, payload: Payload) -> Self {
        self.payload = payload;
        self
    }

    pub fn age(&self, now: Time) -> Time {
        now - self.created_at
    }

    pub fn ant(&self) -> &AntMemory {
        match &self.payload {
            Payload::Ant(m) => m,
            other => panic!("expected ant memory, found {other:?}"),
        }
    }

    pub fn ant_mut(&mut self) -> &mut AntMemory {
        match &mut self.payload {
            Payload::Ant(m) => m,
            other => panic!("expected ant memory, found {other:?}"),
        }
    }
}

/// Forward-ant size for a stack holding `hops` hops so far.
pub fn forward_ant_bits(hops: usize) -> u64 {
    (24 + 8 * hops as u64) * 8
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn priorities() {
        assert_eq!(PacketKind::Data.priority(), Priority::Low);
        assert_eq!(PacketKind::ForwardAnt.priority(), Priority::Low);
        assert_eq!(PacketKind::BackwardAnt.priority(), Priority::High);
        assert_eq!(PacketKind::RoutingInfo.priority(), Priority::High);
    }

    #[test]
    fn ant_sizes() {
        assert_eq!(forward_ant_bits(0), 192);
        assert_eq!(forward_ant_bits(3), 384);
    }

    #[test]
    #[should_panic]
    fn zero_size_rejected() {
        Packet::new(PacketKind::Data, 0, NodeId(0), NodeId(1), 0.0);
    }
}
