//! One trial: the event loop tying network, traffic and routing together.

use crate::config::ExperimentConfig;
use crate::engine::{RngStreams, Time};
use crate::error::Result;
use crate::metrics::{Summary, WindowPoint};
use crate::network::packet::PacketKind;
use crate::network::topology::{LinkId, Topology};
use crate::network::{Event, Network, NetworkParams};
use crate::routing::{Outcome, RoutingAlgorithm};
use crate::traffic::{TrafficEvent, TrafficGenerator, TrafficSpec};

pub struct Simulation {
    net: Network,
    algo: Box<dyn RoutingAlgorithm>,
    traffic: TrafficGenerator,
    warmup_s: Time,
    end: Time,
}

impl Simulation {
    /// Builds a trial. Routing starts at t = 0, data traffic and measurement
    /// at `warmup_s`, and the trial ends `run_length_s` later.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        topo: Topology,
        params: NetworkParams,
        spec: &TrafficSpec,
        mut algo: Box<dyn RoutingAlgorithm>,
        seed: u64,
        warmup_s: f64,
        run_length_s: f64,
        window_s: f64,
    ) -> Result<Self> {
        let streams = RngStreams::new(seed);
        let traffic = TrafficGenerator::new(spec, &topo, params.window_packets, streams)?;
        let mut net = Network::new(topo, params, streams, window_s)?;
        net.set_elaboration_time(algo.elaboration_time());
        net.schedule(warmup_s, Event::MeasurementStart)?;
        algo.start(&mut net);
        Ok(Simulation {
            net,
            algo,
            traffic,
            warmup_s,
            end: warmup_s + run_length_s,
        })
    }

    pub fn from_config(cfg: &ExperimentConfig, seed: u64) -> Result<Self> {
        let topo = cfg.topology()?;
        let algo = cfg.build_algorithm(&topo)?;
        Self::new(
            topo,
            cfg.network.clone(),
            &cfg.traffic,
            algo,
            seed,
            cfg.warmup_s,
            cfg.run_length_s,
            cfg.window_s,
        )
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    pub fn algorithm(&self) -> &dyn RoutingAlgorithm {
        self.algo.as_ref()
    }

    pub fn traffic(&self) -> &TrafficGenerator {
        &self.traffic
    }

    pub fn warmup_s(&self) -> Time {
        self.warmup_s
    }

    pub fn end_time(&self) -> Time {
        self.end
    }

    /// Processes every event up to and including `t`, then sets the clock to `t`.
    pub fn run_until(&mut self, t: Time) -> Result<()> {
        while let Some((_, event)) = self.net.events_mut().pop_due(t) {
            self.dispatch(event)?;
        }
        self.net.events_mut().advance_to(t);
        Ok(())
    }

    pub fn run(&mut self) -> Result<()> {
        self.run_until(self.end)
    }

    pub fn summary(&self) -> Summary {
        let bw = self.net.topology().total_bandwidth_bps();
        self.net.metrics().summarize(self.net.now().min(self.end), bw)
    }

    pub fn series(&self) -> Vec<WindowPoint> {
        self.net.metrics().series(self.net.now().min(self.end))
    }

    fn dispatch(&mut self, event: Event) -> Result<()> {
        match event {
            Event::Arrive { link, packet } => self.arrive(link, packet),
            Event::TxDone { link } => {
                let done = self.net.finish_transmission(link);
                self.algo.on_transmission(&mut self.net, &done);
                if done.from_source && done.kind == PacketKind::Data {
                    if let Some(s) = done.session {
                        self.traffic.release(s);
                    }
                }
            }
            Event::Timer { node, tag } => self.algo.on_timer(&mut self.net, node, tag),
            Event::Traffic(ev) => self.traffic_event(ev)?,
            Event::MeasurementStart => {
                let now = self.net.now();
                self.net.metrics_mut().start_measurement(now);
                self.algo.on_measurement_start(&mut self.net);
                self.traffic.start(&mut self.net)?;
            }
        }
        Ok(())
    }

    fn traffic_event(&mut self, ev: TrafficEvent) -> Result<()> {
        if let Some(p) = self.traffic.handle(ev, &mut self.net)? {
            self.algo.on_data_generated(&mut self.net, p.src, p.dst, p.size_bits);
            let link = self.algo.select_next_hop(&mut self.net, p.src, &p, None);
            let session = p.session;
            if !self.net.send(link, p) {
                if let Some(s) = session {
                    self.traffic.release(s);
                }
            }
        }
        Ok(())
    }

    fn arrive(&mut self, link: LinkId, packet: Box<crate::network::packet::Packet>) {
        let node = self.net.topology().link(link).to;
        if packet.kind != PacketKind::RoutingInfo && self.net.expire_if_stale(&packet) {
            return;
        }
        if packet.kind == PacketKind::Data {
            self.algo.on_data_arrival(&mut self.net, node, link, &packet);
            if node == packet.dst {
                self.net.deliver(&packet);
            } else {
                let next = self.algo.select_next_hop(&mut self.net, node, &packet, Some(link));
                self.net.enqueue(next, packet);
            }
            return;
        }
        let (kind, bits, created_at) = (packet.kind, packet.size_bits, packet.created_at);
        match self.algo.on_routing_packet(&mut self.net, node, link, packet) {
            Outcome::Forward(next, p) => {
                self.net.enqueue(next, p);
            }
            Outcome::Consumed => {
                let now = self.net.now();
                self.net.metrics_mut().on_delivered(now, kind, bits, created_at);
            }
            Outcome::Killed => self.net.metrics_mut().on_killed(kind),
        }
    }
}
