//! Measurement of throughput, delay, routing overhead and drops.

use serde::{Deserialize, Serialize};

use crate::engine::Time;
use crate::network::packet::PacketKind;

/// Lifetime counters for one packet kind, kept from t = 0 so that packet
/// conservation can be checked at any instant.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KindCounters {
    pub created: u64,
    pub delivered: u64,
    pub dropped_buffer: u64,
    pub dropped_ttl: u64,
    pub killed: u64,
}

impl KindCounters {
    pub fn finished(&self) -> u64 {
        self.delivered + self.dropped_buffer + self.dropped_ttl + self.killed
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DropCause {
    Buffer,
    Ttl,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Bin {
    delivered_bits: u64,
    delivered_packets: u64,
    delay_sum: f64,
    generated_bits: u64,
}

/// Log-spaced delay histogram with fixed edges shared by every run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `counts[i]` counts delays in `[edges_s[i], edges_s[i + 1])`. The first
    /// and last bins are open-ended.
    pub edges_s: Vec<f64>,
    pub counts: Vec<u64>,
}

const HIST_MIN_EXP: i32 = -5;
const HIST_MAX_EXP: i32 = 2;
const HIST_PER_DECADE: i32 = 10;

impl Histogram {
    pub fn empty() -> Self {
        let steps = (HIST_MAX_EXP - HIST_MIN_EXP) * HIST_PER_DECADE;
        let mut edges = vec![0.0];
        edges.extend(
            (0..=steps).map(|i| 10f64.powf(HIST_MIN_EXP as f64 + i as f64 / HIST_PER_DECADE as f64)),
        );
        edges.push(f64::INFINITY);
        let counts = vec![0; edges.len() - 1];
        Histogram {
            edges_s: edges,
            counts,
        }
    }

    pub fn add(&mut self, x: f64) {
        // partition_point gives the first edge > x; the bin is the one before it.
        let i = self.edges_s.partition_point(|&e| e <= x).saturating_sub(1);
        let last = self.counts.len() - 1;
        self.counts[i.min(last)] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Upper edge of the bin holding the nearest-rank `q` quantile. `None`
    /// when empty or when that bin is the open-ended last one.
    pub fn quantile(&self, q: f64) -> Option<f64> {
        let total = self.total();
        if total == 0 {
            return None;
        }
        let rank = ((q * total as f64).ceil() as u64).clamp(1, total);
        let mut seen = 0;
        for (i, &c) in self.counts.iter().enumerate() {
            seen += c;
            if seen >= rank {
                return Some(self.edges_s[i + 1]).filter(|e| e.is_finite());
            }
        }
        None
    }

    pub fn merge(&mut self, other: &Histogram) {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
    }
}

/// Nearest-rank percentile of an ascending sample: the value of rank
/// `ceil(p / 100 * n)` (1-based). `None` for an empty sample.
pub fn percentile(sorted: &[f64], p: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let n = sorted.len();
    let rank = (p * n as f64 / 100.0).ceil() as usize;
    Some(sorted[rank.clamp(1, n) - 1])
}

/// Throughput divided by the 90th-percentile delay.
pub fn power(throughput_bps: f64, delay_p90_s: Option<f64>) -> Option<f64> {
    delay_p90_s.filter(|&d| d > 0.0).map(|d| throughput_bps / d)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowPoint {
    /// End of the window, seconds since measurement start.
    pub time_s: f64,
    pub throughput_bps: f64,
    pub mean_delay_s: Option<f64>,
    pub offered_bps: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Drops {
    pub buffer: u64,
    pub ttl: u64,
}

/// Per-trial result record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub measured_s: f64,
    pub throughput_bps: f64,
    pub offered_bps: f64,
    pub generated_packets: u64,
    pub delivered_packets: u64,
    pub throttled_packets: u64,
    pub delay_mean_s: Option<f64>,
    pub delay_p50_s: Option<f64>,
    pub delay_p90_s: Option<f64>,
    pub delay_p99_s: Option<f64>,
    pub routing_bits: u64,
    pub overhead: f64,
    pub drops: Drops,
    pub ant_deaths: u64,
    pub power: Option<f64>,
    pub histogram: Histogram,
}

#[derive(Debug, Clone)]
pub struct MetricsCollector {
    window_s: f64,
    start: Option<Time>,
    lifetime: [KindCounters; 4],
    generated_bits: u64,
    generated_packets: u64,
    throttled_packets: u64,
    throttled_bits: u64,
    delivered_bits: u64,
    delays: Vec<f64>,
    delay_sum: f64,
    histogram: Histogram,
    bins: Vec<Bin>,
    routing_bits: u64,
    drops: Drops,
    ant_deaths: u64,
}

impl MetricsCollector {
    pub fn new(window_s: f64) -> Self {
        assert!(window_s > 0.0);
        MetricsCollector {
            window_s,
            start: None,
            lifetime: [KindCounters::default(); 4],
            generated_bits: 0,
            generated_packets: 0,
            throttled_packets: 0,
            throttled_bits: 0,
            delivered_bits: 0,
            delays: Vec::new(),
            delay_sum: 0.0,
            histogram: Histogram::empty(),
            bins: Vec::new(),
            routing_bits: 0,
            drops: Drops::default(),
            ant_deaths: 0,
        }
    }

    pub fn start_measurement(&mut self, now: Time) {
        self.start = Some(now);
    }

    pub fn measurement_start(&self) -> Option<Time> {
        self.start
    }

    pub fn measuring(&self) -> bool {
        self.start.is_some()
    }

    pub fn lifetime(&self, kind: PacketKind) -> KindCounters {
        self.lifetime[kind.index()]
    }

    fn bin(&mut self, now: Time) -> Option<&mut Bin> {
        let start = self.start?;
        let i = ((now - start) / self.window_s).floor().max(0.0) as usize;
        if i >= self.bins.len() {
            self.bins.resize(i + 1, Bin::default());
        }
        Some(&mut self.bins[i])
    }

    pub fn on_created(&mut self, kind: PacketKind) {
        self.lifetime[kind.index()].created += 1;
    }

    /// A data packet offered by a session, admitted or not.
    pub fn on_generated(&mut self, now: Time, bits: u64, admitted: bool) {
        if let Some(b) = self.bin(now) {
            b.generated_bits += bits;
        }
        if self.measuring() {
            self.generated_bits += bits;
            self.generated_packets += 1;
            if !admitted {
                self.throttled_packets += 1;
                self.throttled_bits += bits;
            }
        }
    }

    pub fn on_delivered(&mut self, now: Time, kind: PacketKind, bits: u64, created_at: Time) {
        self.lifetime[kind.index()].delivered += 1;
        if kind != PacketKind::Data {
            return;
        }
        let delay = now - created_at;
        if let Some(b) = self.bin(now) {
            b.delivered_bits += bits;
            b.delivered_packets += 1;
            b.delay_sum += delay;
        }
        if self.measuring() {
            self.delivered_bits += bits;
            self.delays.push(delay);
            self.delay_sum += delay;
            self.histogram.add(delay);
        }
    }

    pub fn on_dropped(&mut self, kind: PacketKind, cause: DropCause) {
        let c = &mut self.lifetime[kind.index()];
        match cause {
            DropCause::Buffer => c.dropped_buffer += 1,
            DropCause::Ttl => c.dropped_ttl += 1,
        }
        if kind == PacketKind::Data && self.measuring() {
            match cause {
                DropCause::Buffer => self.drops.buffer += 1,
                DropCause::Ttl => self.drops.ttl += 1,
            }
        }
    }

    pub fn on_killed(&mut self, kind: PacketKind) {
        self.lifetime[kind.index()].killed += 1;
        if self.measuring() {
            self.ant_deaths += 1;
        }
    }

    /// A routing packet finished crossing a link.
    pub fn on_routing_transmitted(&mut self, bits: u64) {
        if self.measuring() {
            self.routing_bits += bits;
        }
    }

    pub fn delivered_bits(&self) -> u64 {
        self.delivered_bits
    }

    pub fn routing_bits(&self) -> u64 {
        self.routing_bits
    }

    /// Windowed series over `[start, end)`, one point per full or partial window.
    pub fn series(&self, end: Time) -> Vec<WindowPoint> {
        let Some(start) = self.start else {
            return Vec::new();
        };
        let span = (end - start).max(0.0);
        let n = (span / self.window_s).ceil() as usize;
        (0..n)
            .map(|i| {
                let b = self.bins.get(i).copied().unwrap_or_default();
                let lo = i as f64 * self.window_s;
                let hi = ((i + 1) as f64 * self.window_s).min(span);
                let width = hi - lo;
                WindowPoint {
                    time_s: hi,
                    throughput_bps: b.delivered_bits as f64 / width,
                    mean_delay_s: (b.delivered_packets > 0)
                        .then(|| b.delay_sum / b.delivered_packets as f64),
                    offered_bps: b.generated_bits as f64 / width,
                }
            })
            .collect()
    }

    pub fn summarize(&self, end: Time, total_bandwidth_bps: f64) -> Summary {
        let measured_s = self.start.map_or(0.0, |s| (end - s).max(0.0));
        let per_s = |bits: u64| {
            if measured_s > 0.0 {
                bits as f64 / measured_s
            } else {
                0.0
            }
        };
        let mut sorted = self.delays.clone();
        sorted.sort_by(f64::total_cmp);
        let throughput_bps = per_s(self.delivered_bits);
        let delay_p90_s = percentile(&sorted, 90.0);
        let capacity = total_bandwidth_bps * measured_s;
        Summary {
            measured_s,
            throughput_bps,
            offered_bps: per_s(self.generated_bits),
            generated_packets: self.generated_packets,
            delivered_packets: sorted.len() as u64,
            throttled_packets: self.throttled_packets,
            delay_mean_s: (!sorted.is_empty()).then(|| self.delay_sum / sorted.len() as f64),
            delay_p50_s: percentile(&sorted, 50.0),
            delay_p90_s,
            delay_p99_s: percentile(&sorted, 99.0),
            routing_bits: self.routing_bits,
            overhead: if capacity > 0.0 {
                self.routing_bits as f64 / capacity
            } else {
                0.0
            },
            drops: self.drops,
            ant_deaths: self.ant_deaths,
            power: power(throughput_bps, delay_p90_s),
            histogram: self.histogram.clone(),
        }
    }
}

/// Writes a windowed series as CSV with columns `time_s,throughput_bps,mean_delay_s`.
/// Windows without deliveries leave the delay column empty.
pub fn series_csv(points: &[WindowPoint]) -> String {
    let mut out = String::from("time_s,throughput_bps,mean_delay_s\n");
    for p in points {
        let delay = p.mean_delay_s.map(|d| d.to_string()).unwrap_or_default();
        out.push_str(&format!("{},{},{}\n", p.time_s, p.throughput_bps, delay));
    }
    out
}
