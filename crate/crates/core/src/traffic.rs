//! Workload generation: session arrival processes, spatial patterns, hot
//! spots and per-session CBR/GVBR packet streams.

use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::engine::{sample_exponential, RngStreams, Stream, Time};
use crate::error::{Error, Result};
use crate::network::packet::{Packet, PacketKind};
use crate::network::topology::{NodeId, Topology};
use crate::network::{Event, Network};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Temporal {
    /// Poisson session arrivals at every node.
    #[serde(rename = "P", alias = "p")]
    Poisson,
    /// A fixed set of persistent sessions opened at measurement start.
    #[serde(rename = "F", alias = "f")]
    Fixed,
    /// Poisson arrivals plus a hot-spot overlay switched on and off.
    #[serde(rename = "TMPHS", alias = "tmphs")]
    TemporaryHotSpots,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Spatial {
    #[serde(rename = "U", alias = "u")]
    Uniform,
    /// Per-node session rates scaled by a random multiplier.
    #[serde(rename = "R", alias = "r")]
    Random,
    /// Uniform base with a permanent hot-spot overlay.
    #[serde(rename = "HS", alias = "hs")]
    HotSpots,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StreamKind {
    #[serde(rename = "CBR", alias = "cbr")]
    Cbr,
    #[serde(rename = "GVBR", alias = "gvbr")]
    Gvbr,
}

/// The traffic block of an experiment config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrafficSpec {
    pub temporal: Temporal,
    pub spatial: Spatial,
    pub stream: StreamKind,
    pub msia_s: f64,
    pub mpia_s: f64,
    pub hs_count: u32,
    pub mpia_hs_s: Option<f64>,
    /// Overlay switch times, seconds after measurement start.
    pub hot_spot_on_s: Option<f64>,
    pub hot_spot_off_s: Option<f64>,
    /// Explicit hot-spot labels; drawn at random when absent.
    pub hot_spots: Option<Vec<u32>>,
    pub mean_packet_bits: u64,
    /// Packets per Poisson session.
    pub session_packets: u32,
    /// Replaces the all-pairs set of fixed sessions, as `[src, dst]` labels.
    pub fixed_pairs: Option<Vec<[u32; 2]>>,
    pub sessions_per_pair: u32,
}

impl Default for TrafficSpec {
    fn default() -> Self {
        TrafficSpec {
            temporal: Temporal::Poisson,
            spatial: Spatial::Uniform,
            stream: StreamKind::Gvbr,
            msia_s: 2.0,
            mpia_s: 0.005,
            hs_count: 0,
            mpia_hs_s: None,
            hot_spot_on_s: None,
            hot_spot_off_s: None,
            hot_spots: None,
            mean_packet_bits: 4096,
            session_packets: 200,
            fixed_pairs: None,
            sessions_per_pair: 1,
        }
    }
}

impl TrafficSpec {
    pub fn validate(&self, node_count: usize) -> Result<()> {
        let positive = |key: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(key, format!("must be positive, got {v}")))
            }
        };
        positive("traffic.msia_s", self.msia_s)?;
        positive("traffic.mpia_s", self.mpia_s)?;
        if self.mean_packet_bits == 0 {
            return Err(Error::config("traffic.mean_packet_bits", "must be positive"));
        }
        if self.session_packets == 0 {
            return Err(Error::config("traffic.session_packets", "must be positive"));
        }
        if self.hs_count as usize >= node_count {
            return Err(Error::config(
                "traffic.hs_count",
                format!("must be below the node count {node_count}"),
            ));
        }
        if self.hot_spots_enabled() {
            match self.mpia_hs_s {
                Some(v) => positive("traffic.mpia_hs_s", v)?,
                None => {
                    return Err(Error::config(
                        "traffic.mpia_hs_s",
                        "required when hot spots are enabled",
                    ))
                }
            }
            if let Some(list) = &self.hot_spots {
                if list.len() != self.hs_count as usize {
                    return Err(Error::config("traffic.hot_spots", "length must equal hs_count"));
                }
                check_labels("traffic.hot_spots", list, node_count)?;
                let mut sorted = list.clone();
                sorted.sort_unstable();
                sorted.dedup();
                if sorted.len() != list.len() {
                    return Err(Error::config("traffic.hot_spots", "labels must be distinct"));
                }
            }
        }
        if self.temporal == Temporal::TemporaryHotSpots {
            if self.hs_count == 0 {
                return Err(Error::config("traffic.hs_count", "TMPHS needs at least one hot spot"));
            }
            let (on, off) = match (self.hot_spot_on_s, self.hot_spot_off_s) {
                (Some(on), Some(off)) => (on, off),
                _ => {
                    return Err(Error::config(
                        "traffic.hot_spot_on_s",
                        "TMPHS needs hot_spot_on_s and hot_spot_off_s",
                    ))
                }
            };
            if !(on >= 0.0) || !(off >= on) {
                return Err(Error::config(
                    "traffic.hot_spot_off_s",
                    format!("need 0 <= on <= off, got on={on}, off={off}"),
                ));
            }
        }
        if self.spatial == Spatial::HotSpots && self.hs_count == 0 {
            return Err(Error::config("traffic.hs_count", "HS spatial pattern needs hs_count > 0"));
        }
        if let Some(pairs) = &self.fixed_pairs {
            for p in pairs {
                check_labels("traffic.fixed_pairs", p, node_count)?;
                if p[0] == p[1] {
                    return Err(Error::config("traffic.fixed_pairs", "source equals destination"));
                }
            }
        }
        Ok(())
    }

    pub fn hot_spots_enabled(&self) -> bool {
        self.hs_count > 0
            && (self.spatial == Spatial::HotSpots || self.temporal == Temporal::TemporaryHotSpots)
    }

    /// Overlay activity window relative to measurement start.
    pub fn hot_spot_window(&self) -> Option<(f64, f64)> {
        if !self.hot_spots_enabled() {
            return None;
        }
        match self.temporal {
            Temporal::TemporaryHotSpots => Some((
                self.hot_spot_on_s.unwrap_or(0.0),
                self.hot_spot_off_s.unwrap_or(f64::INFINITY),
            )),
            _ => Some((0.0, f64::INFINITY)),
        }
    }
}

fn check_labels(key: &str, labels: &[u32], node_count: usize) -> Result<()> {
    match labels.iter().find(|&&l| l < 1 || l as usize > node_count) {
        Some(l) => Err(Error::config(key, format!("node {l} outside 1..={node_count}"))),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrafficEvent {
    SessionArrival { node: NodeId },
    Generate { session: u32 },
    HotSpots { on: bool },
}

#[derive(Debug, Clone)]
pub struct Session {
    pub src: NodeId,
    pub dst: NodeId,
    pub mean_gap_s: f64,
    pub stream: StreamKind,
    /// `None` for persistent sessions.
    pub remaining: Option<u32>,
    pub active: bool,
    pub hot_spot: bool,
    /// Admitted packets whose last bit has not yet left the source.
    pub unsent: u32,
    rng: ChaCha8Rng,
}

impl Session {
    /// Draws the next packet size and the gap to the following packet.
    fn draw(&mut self, mean_bits: u64) -> (u64, f64) {
        match self.stream {
            StreamKind::Cbr => (mean_bits, self.mean_gap_s),
            StreamKind::Gvbr => {
                let size = sample_exponential(&mut self.rng, mean_bits as f64)
                    .expect("validated mean")
                    .ceil()
                    .max(1.0) as u64;
                let gap = sample_exponential(&mut self.rng, self.mean_gap_s).expect("validated mean");
                (size, gap)
            }
        }
    }
}

/// Draws a destination uniformly among the nodes other than `src`.
pub fn uniform_destination<R: Rng + ?Sized>(rng: &mut R, src: NodeId, node_count: usize) -> NodeId {
    let k = rng.random_range(0..node_count as u32 - 1);
    NodeId(if k >= src.0 { k + 1 } else { k })
}

pub struct TrafficGenerator {
    spec: TrafficSpec,
    node_count: usize,
    window: u32,
    streams: RngStreams,
    arrivals: ChaCha8Rng,
    /// Mean session inter-arrival time per node.
    node_msia: Vec<f64>,
    hot_spots: Vec<NodeId>,
    sessions: Vec<Session>,
    origin: Time,
}

impl TrafficGenerator {
    pub fn new(spec: &TrafficSpec, topo: &Topology, window: u32, streams: RngStreams) -> Result<Self> {
        let n = topo.node_count();
        spec.validate(n)?;
        if window == 0 {
            return Err(Error::config("network.window_packets", "must be positive"));
        }
        let mut setup = streams.stream(Stream::TrafficSetup);
        let node_msia = (0..n)
            .map(|_| match spec.spatial {
                Spatial::Random => spec.msia_s * setup.random_range(0.5..=1.5),
                _ => spec.msia_s,
            })
            .collect();
        let hot_spots = if !spec.hot_spots_enabled() {
            Vec::new()
        } else if let Some(labels) = &spec.hot_spots {
            labels.iter().map(|&l| NodeId::from_label(l)).collect()
        } else {
            let mut v: Vec<NodeId> = sample(&mut setup, n, spec.hs_count as usize)
                .into_iter()
                .map(|i| NodeId(i as u32))
                .collect();
            v.sort_unstable();
            v
        };
        Ok(TrafficGenerator {
            spec: spec.clone(),
            node_count: n,
            window,
            streams,
            arrivals: streams.stream(Stream::SessionArrivals),
            node_msia,
            hot_spots,
            sessions: Vec::new(),
            origin: 0.0,
        })
    }

    pub fn spec(&self) -> &TrafficSpec {
        &self.spec
    }

    pub fn hot_spots(&self) -> &[NodeId] {
        &self.hot_spots
    }

    pub fn node_msia(&self) -> &[f64] {
        &self.node_msia
    }

    pub fn sessions(&self) -> &[Session] {
        &self.sessions
    }

    /// Schedules the initial traffic events; data starts at the current time.
    pub fn start(&mut self, net: &mut Network) -> Result<()> {
        self.origin = net.now();
        match self.spec.temporal {
            Temporal::Fixed => {
                let pairs: Vec<(NodeId, NodeId)> = match &self.spec.fixed_pairs {
                    Some(p) => p
                        .iter()
                        .map(|[a, b]| (NodeId::from_label(*a), NodeId::from_label(*b)))
                        .collect(),
                    None => (0..self.node_count as u32)
                        .flat_map(|s| {
                            (0..self.node_count as u32)
                                .filter(move |&d| d != s)
                                .map(move |d| (NodeId(s), NodeId(d)))
                        })
                        .collect(),
                };
                for (s, d) in pairs {
                    for _ in 0..self.spec.sessions_per_pair {
                        self.open_session(net, s, d, self.spec.mpia_s, None, false)?;
                    }
                }
            }
            Temporal::Poisson | Temporal::TemporaryHotSpots => {
                for node in 0..self.node_count as u32 {
                    let node = NodeId(node);
                    let gap = sample_exponential(&mut self.arrivals, self.node_msia[node.index()])?;
                    net.schedule_in(gap, Event::Traffic(TrafficEvent::SessionArrival { node }))?;
                }
            }
        }
        if let Some((on, off)) = self.spec.hot_spot_window() {
            if off > on {
                net.schedule(self.origin + on, Event::Traffic(TrafficEvent::HotSpots { on: true }))?;
                if off.is_finite() {
                    net.schedule(self.origin + off, Event::Traffic(TrafficEvent::HotSpots { on: false }))?;
                }
            }
        }
        Ok(())
    }

    fn open_session(
        &mut self,
        net: &mut Network,
        src: NodeId,
        dst: NodeId,
        mean_gap_s: f64,
        remaining: Option<u32>,
        hot_spot: bool,
    ) -> Result<()> {
        let index = self.sessions.len() as u32;
        self.sessions.push(Session {
            src,
            dst,
            mean_gap_s,
            stream: self.spec.stream,
            remaining,
            active: true,
            hot_spot,
            unsent: 0,
            rng: self.streams.session(index as u64),
        });
        net.schedule_in(0.0, Event::Traffic(TrafficEvent::Generate { session: index }))
    }

    /// Handles a traffic event. Returns the data packet to inject at its
    /// source when a generation is admitted by the production window.
    pub fn handle(&mut self, event: TrafficEvent, net: &mut Network) -> Result<Option<Packet>> {
        match event {
            TrafficEvent::SessionArrival { node } => {
                let dst = uniform_destination(&mut self.arrivals, node, self.node_count);
                let packets = self.spec.session_packets;
                self.open_session(net, node, dst, self.spec.mpia_s, Some(packets), false)?;
                let gap = sample_exponential(&mut self.arrivals, self.node_msia[node.index()])?;
                net.schedule_in(gap, Event::Traffic(TrafficEvent::SessionArrival { node }))?;
                Ok(None)
            }
            TrafficEvent::HotSpots { on: true } => {
                let mpia = self.spec.mpia_hs_s.expect("validated");
                for h in self.hot_spots.clone() {
                    for d in 0..self.node_count as u32 {
                        if d != h.0 {
                            self.open_session(net, h, NodeId(d), mpia, None, true)?;
                        }
                    }
                }
                Ok(None)
            }
            TrafficEvent::HotSpots { on: false } => {
                for s in self.sessions.iter_mut().filter(|s| s.hot_spot) {
                    s.active = false;
                }
                Ok(None)
            }
            TrafficEvent::Generate { session } => self.generate(session, net),
        }
    }

    fn generate(&mut self, index: u32, net: &mut Network) -> Result<Option<Packet>> {
        let mean_bits = self.spec.mean_packet_bits;
        let window = self.window;
        let s = &mut self.sessions[index as usize];
        if !s.active {
            return Ok(None);
        }
        let (bits, gap) = s.draw(mean_bits);
        let admitted = s.unsent < window;
        let now = net.now();
        net.metrics_mut().on_generated(now, bits, admitted);
        if let Some(r) = &mut s.remaining {
            *r -= 1;
            if *r == 0 {
                s.active = false;
            }
        }
        if s.active {
            net.schedule_in(gap, Event::Traffic(TrafficEvent::Generate { session: index }))?;
        }
        if !admitted {
            return Ok(None);
        }
        s.unsent += 1;
        let mut p = Packet::new(PacketKind::Data, bits, s.src, s.dst, now);
        p.session = Some(index);
        Ok(Some(p))
    }

    /// The packet left its source node, or never made it into the source buffer.
    pub fn release(&mut self, session: u32) {
        let s = &mut self.sessions[session as usize];
        debug_assert!(s.unsent > 0);
        s.unsent -= 1;
    }
}
