use std::collections::VecDeque;

use crate::network::packet::{Packet, Priority};

/// Output port of one directed link: two FIFO queues and the packet on the wire.
#[derive(Debug, Default)]
pub struct Port {
    high: VecDeque<Box<Packet>>,
    low: VecDeque<Box<Packet>>,
    high_bits: u64,
    low_bits: u64,
    in_service: Option<Box<Packet>>,
}

impl Port {
    pub fn push(&mut self, packet: Box<Packet>) {
        match packet.kind.priority() {
            Priority::High => {
                self.high_bits += packet.size_bits;
                self.high.push_back(packet);
            }
            Priority::Low => {
                self.low_bits += packet.size_bits;
                self.low.push_back(packet);
            }
        }
    }

    /// Removes the next packet to transmit: high priority first, FIFO within a class.
    pub fn pop(&mut self) -> Option<Box<Packet>> {
        if let Some(p) = self.high.pop_front() {
            self.high_bits -= p.size_bits;
            return Some(p);
        }
        let p = self.low.pop_front()?;
        self.low_bits -= p.size_bits;
        Some(p)
    }

    pub fn is_busy(&self) -> bool {
        self.in_service.is_some()
    }

    pub fn begin_service(&mut self, packet: Box<Packet>) {
        debug_assert!(self.in_service.is_none());
        self.in_service = Some(packet);
    }

    pub fn end_service(&mut self) -> Option<Box<Packet>> {
        self.in_service.take()
    }

    pub fn in_service(&self) -> Option<&Packet> {
        self.in_service.as_deref()
    }

    /// Bits waiting in the given class, excluding the packet on the wire.
    pub fn queued_bits(&self, priority: Priority) -> u64 {
        match priority {
            Priority::High => self.high_bits,
            Priority::Low => self.low_bits,
        }
    }

    pub fn waiting_bits(&self) -> u64 {
        self.high_bits + self.low_bits
    }

    pub fn queued_packets(&self) -> usize {
        self.high.len() + self.low.len()
    }

    /// Queued and in-service packets.
    pub fn packets(&self) -> impl Iterator<Item = &Packet> {
        self.in_service
            .iter()
            .chain(self.high.iter())
            .chain(self.low.iter())
            .map(|p| &**p)
    }
}
