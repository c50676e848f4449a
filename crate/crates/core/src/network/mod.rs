//! Store-and-forward network state: shared node buffers, two-class output
//! queues, link transmission and the event vocabulary of a trial.

pub mod packet;
pub mod port;
pub mod topology;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{EventQueue, RngStreams, Stream, Time};
use crate::error::{Error, Result};
use crate::metrics::{DropCause, MetricsCollector};
use crate::traffic::TrafficEvent;
use packet::{Packet, PacketKind, Priority};
use port::Port;
use topology::{LinkId, NodeId, Topology};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetworkParams {
    pub buffer_bits: u64,
    /// Processing delay of a data packet at an intermediate node.
    pub data_service_s: f64,
    pub ttl_s: f64,
    /// Production window of a session, in packets.
    pub window_packets: u32,
}

impl Default for NetworkParams {
    fn default() -> Self {
        NetworkParams {
            buffer_bits: 1_000_000_000,
            data_service_s: 0.0003,
            ttl_s: 15.0,
            window_packets: 50,
        }
    }
}

impl NetworkParams {
    pub fn validate(&self) -> Result<()> {
        if self.buffer_bits == 0 {
            return Err(Error::config("network.buffer_bits", "must be positive"));
        }
        if !(self.data_service_s >= 0.0) || !self.data_service_s.is_finite() {
            return Err(Error::config("network.data_service_s", "must be nonnegative"));
        }
        if !(self.ttl_s > 0.0) {
            return Err(Error::config("network.ttl_s", "must be positive"));
        }
        if self.window_packets == 0 {
            return Err(Error::config("network.window_packets", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug)]
pub enum Event {
    /// A packet has crossed `link` and finished processing at its far end.
    Arrive { link: LinkId, packet: Box<Packet> },
    /// The last bit of the packet in service on `link` has left.
    TxDone { link: LinkId },
    Timer { node: NodeId, tag: u64 },
    Traffic(TrafficEvent),
    MeasurementStart,
}

/// What a finished transmission looked like, for estimators and flow control.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transmission {
    pub link: LinkId,
    pub kind: PacketKind,
    pub bits: u64,
    pub session: Option<u32>,
    /// True when the packet just left its source node.
    pub from_source: bool,
    /// Queueing plus transmission time at this node.
    pub sojourn: f64,
    pub tx_time: f64,
}

pub struct Network {
    topo: Topology,
    params: NetworkParams,
    events: EventQueue<Event>,
    ports: Vec<Port>,
    buffer_used: Vec<u64>,
    /// Processing delay of routing packets under the active algorithm.
    elaboration_s: f64,
    ant_rng: ChaCha8Rng,
    data_rng: ChaCha8Rng,
    phase_rng: ChaCha8Rng,
    metrics: MetricsCollector,
    next_packet_id: u64,
}

impl Network {
    pub fn new(topo: Topology, params: NetworkParams, streams: RngStreams, window_s: f64) -> Result<Self> {
        params.validate()?;
        let links = topo.link_count();
        let nodes = topo.node_count();
        let mut ports = Vec::with_capacity(links);
        ports.resize_with(links, Port::default);
        Ok(Network {
            topo,
            params,
            events: EventQueue::new(),
            ports,
            buffer_used: vec![0; nodes],
            elaboration_s: 0.0,
            ant_rng: streams.stream(Stream::AntRouting),
            data_rng: streams.stream(Stream::DataRouting),
            phase_rng: streams.stream(Stream::TimerPhases),
            metrics: MetricsCollector::new(window_s),
            next_packet_id: 0,
        })
    }

    pub fn now(&self) -> Time {
        self.events.now()
    }

    pub fn topology(&self) -> &Topology {
        &self.topo
    }

    pub fn params(&self) -> &NetworkParams {
        &self.params
    }

    pub fn set_elaboration_time(&mut self, seconds: f64) {
        self.elaboration_s = seconds;
    }

    pub fn metrics(&self) -> &MetricsCollector {
        &self.metrics
    }

    pub fn metrics_mut(&mut self) -> &mut MetricsCollector {
        &mut self.metrics
    }

    pub fn ant_rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.ant_rng
    }

    pub fn data_rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.data_rng
    }

    pub fn phase_rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.phase_rng
    }

    pub fn events(&self) -> &EventQueue<Event> {
        &self.events
    }

    pub(crate) fn events_mut(&mut self) -> &mut EventQueue<Event> {
        &mut self.events
    }

    pub fn schedule(&mut self, at: Time, event: Event) -> Result<()> {
        self.events.schedule(at, event)
    }

    pub fn schedule_in(&mut self, delay: Time, event: Event) -> Result<()> {
        self.events.schedule_in(delay, event)
    }

    /// Arms a routing timer for `node`.
    pub fn schedule_timer(&mut self, delay: Time, node: NodeId, tag: u64) {
        self.events
            .schedule_in(delay, Event::Timer { node, tag })
            .expect("timer delays are nonnegative");
    }

    pub fn buffer_used(&self, node: NodeId) -> u64 {
        self.buffer_used[node.index()]
    }

    pub fn port(&self, link: LinkId) -> &Port {
        &self.ports[link.index()]
    }

    /// Bits waiting in one priority class of the output queue of `link`.
    pub fn queued_bits(&self, link: LinkId, priority: Priority) -> u64 {
        self.ports[link.index()].queued_bits(priority)
    }

    /// Bits waiting in both classes, excluding the packet on the wire.
    pub fn waiting_bits(&self, link: LinkId) -> u64 {
        self.ports[link.index()].waiting_bits()
    }

    /// Injects a packet created at `node` onto `link`.
    pub fn send(&mut self, link: LinkId, mut packet: Packet) -> bool {
        packet.id = self.next_packet_id;
        self.next_packet_id += 1;
        self.metrics.on_created(packet.kind);
        self.enqueue(link, Box::new(packet))
    }

    /// Queues a packet on the output port of `link`. Returns false (and
    /// counts a drop) if the node buffer cannot hold it.
    pub fn enqueue(&mut self, link: LinkId, mut packet: Box<Packet>) -> bool {
        let node = self.topo.link(link).from;
        let used = &mut self.buffer_used[node.index()];
        if *used + packet.size_bits > self.params.buffer_bits {
            self.metrics.on_dropped(packet.kind, DropCause::Buffer);
            return false;
        }
        *used += packet.size_bits;
        packet.enqueued_at = self.events.now();
        self.ports[link.index()].push(packet);
        if !self.ports[link.index()].is_busy() {
            self.start_transmission(link);
        }
        true
    }

    fn start_transmission(&mut self, link: LinkId) {
        let Some(packet) = self.ports[link.index()].pop() else {
            return;
        };
        let tx = self.topo.link(link).transmission_time(packet.size_bits);
        self.ports[link.index()].begin_service(packet);
        self.events
            .schedule_in(tx, Event::TxDone { link })
            .expect("transmission times are nonnegative");
    }

    /// Completes the transmission in progress on `link`, schedules the
    /// arrival at the far end and starts the next packet.
    pub(crate) fn finish_transmission(&mut self, link: LinkId) -> Transmission {
        let now = self.events.now();
        let mut packet = self.ports[link.index()]
            .end_service()
            .expect("TxDone on an idle link");
        let l = self.topo.link(link);
        let (from, to, prop) = (l.from, l.to, l.prop_delay_s);
        let tx_time = l.transmission_time(packet.size_bits);
        self.buffer_used[from.index()] -= packet.size_bits;
        if packet.kind.is_routing() {
            self.metrics.on_routing_transmitted(packet.size_bits);
        }
        let done = Transmission {
            link,
            kind: packet.kind,
            bits: packet.size_bits,
            session: packet.session,
            from_source: packet.hops == 0 && from == packet.src,
            sojourn: now - packet.enqueued_at,
            tx_time,
        };
        let processing = match packet.kind {
            PacketKind::Data if to == packet.dst => 0.0,
            PacketKind::Data => self.params.data_service_s,
            PacketKind::ForwardAnt if to != packet.dst => self.params.data_service_s,
            _ => self.elaboration_s,
        };
        packet.hops += 1;
        packet.last_tx_end = now;
        self.events
            .schedule_in(prop + processing, Event::Arrive { link, packet })
            .expect("delays are nonnegative");
        self.start_transmission(link);
        done
    }

    /// Drops a packet that has outlived the TTL. Returns true if it did.
    pub(crate) fn expire_if_stale(&mut self, packet: &Packet) -> bool {
        if packet.age(self.now()) > self.params.ttl_s {
            self.metrics.on_dropped(packet.kind, DropCause::Ttl);
            true
        } else {
            false
        }
    }

    pub(crate) fn deliver(&mut self, packet: &Packet) {
        let now = self.now();
        self.metrics
            .on_delivered(now, packet.kind, packet.size_bits, packet.created_at);
    }

    /// An ant destroyed by the routing algorithm.
    pub fn kill(&mut self, packet: &Packet) {
        self.metrics.on_killed(packet.kind);
    }

    /// Packets of each kind currently queued, on a wire or in flight.
    pub fn in_transit(&self) -> [u64; 4] {
        let mut counts = [0u64; 4];
        for port in &self.ports {
            for p in port.packets() {
                counts[p.kind.index()] += 1;
            }
        }
        for e in self.events.pending() {
            if let Event::Arrive { packet, .. } = e {
                counts[packet.kind.index()] += 1;
            }
        }
        counts
    }

    /// Checks that every node's buffer counter equals the bits it holds.
    pub fn buffers_consistent(&self) -> bool {
        let mut held = vec![0u64; self.topo.node_count()];
        for (i, port) in self.ports.iter().enumerate() {
            let from = self.topo.link(LinkId(i as u32)).from;
            held[from.index()] += port.packets().map(|p| p.size_bits).sum::<u64>();
        }
        held == self.buffer_used
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use topology::LinkSpec;

    fn net(bandwidth: f64, delay: f64, buffer: u64) -> Network {
        let topo = Topology::new(
            "pair",
            2,
            &[LinkSpec {
                a: 1,
                b: 2,
                bandwidth_bps: bandwidth,
                prop_delay_s: delay,
            }],
        )
        .unwrap();
        let params = NetworkParams {
            buffer_bits: buffer,
            data_service_s: 0.0,
            ..NetworkParams::default()
        };
        Network::new(topo, params, RngStreams::new(1), 5.0).unwrap()
    }

    fn data(bits: u64) -> Packet {
        Packet::new(PacketKind::Data, bits, NodeId(0), NodeId(1), 0.0)
    }

    /// Runs the queue, completing transmissions, and returns arrival times.
    fn drain(n: &mut Network) -> Vec<f64> {
        let mut arrivals = Vec::new();
        while let Some((at, ev)) = n.events_mut().pop_due(f64::INFINITY) {
            match ev {
                Event::TxDone { link } => {
                    n.finish_transmission(link);
                }
                Event::Arrive { .. } => arrivals.push(at),
                _ => unreachable!(),
            }
        }
        arrivals
    }

    #[test]
    fn buffer_capacity_is_enforced() {
        let mut n = net(1.0, 0.0, 1000);
        assert!(n.send(LinkId(0), data(900)));
        assert!(!n.send(LinkId(0), data(200)));
        assert_eq!(n.buffer_used(NodeId(0)), 900);
        assert_eq!(n.metrics().lifetime(PacketKind::Data).dropped_buffer, 1);
    }

    #[test]
    fn accepted_packet_charges_buffer() {
        let mut n = net(1e6, 0.0, 1_000_000_000);
        assert!(n.send(LinkId(0), data(4096)));
        assert_eq!(n.buffer_used(NodeId(0)), 4096);
        assert!(n.buffers_consistent());
        drain(&mut n);
        assert_eq!(n.buffer_used(NodeId(0)), 0);
    }

    #[test]
    fn arrival_after_transmission_and_propagation() {
        let mut n = net(1.5e6, 0.004, 1_000_000_000);
        n.send(LinkId(0), data(4096));
        let arrivals = drain(&mut n);
        assert_eq!(arrivals.len(), 1);
        assert!((arrivals[0] - 0.006_730_666_666).abs() < 1e-9);
    }

    #[test]
    fn transmissions_are_serialized() {
        let mut n = net(8.0, 0.0, 1_000_000_000);
        n.send(LinkId(0), data(8));
        n.send(LinkId(0), data(8));
        assert_eq!(drain(&mut n), vec![1.0, 2.0]);
    }

    #[test]
    fn routing_packets_overtake_data() {
        let mut n = net(8.0, 0.0, 1_000_000_000);
        n.send(LinkId(0), data(8));
        n.send(LinkId(0), data(8));
        n.send(
            LinkId(0),
            Packet::new(PacketKind::RoutingInfo, 8, NodeId(0), NodeId(1), 0.0),
        );
        let mut kinds = Vec::new();
        while let Some((_, ev)) = n.events_mut().pop_due(f64::INFINITY) {
            match ev {
                Event::TxDone { link } => {
                    n.finish_transmission(link);
                }
                Event::Arrive { packet, .. } => kinds.push(packet.kind),
                _ => unreachable!(),
            }
        }
        assert_eq!(
            kinds,
            vec![PacketKind::Data, PacketKind::RoutingInfo, PacketKind::Data]
        );
    }
}
