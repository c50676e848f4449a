//! Deterministic discrete-event core: a continuous clock, a time-ordered
//! event list, and named random substreams derived from one master seed.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use crate::error::{Error, Result};

/// Simulation time in seconds.
pub type Time = f64;

struct Scheduled<E> {
    at: Time,
    seq: u64,
    event: E,
}

impl<E> PartialEq for Scheduled<E> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<E> Eq for Scheduled<E> {}

impl<E> PartialOrd for Scheduled<E> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<E> Ord for Scheduled<E> {
    // BinaryHeap is a max-heap: invert so the earliest (time, seq) pops first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .at
            .total_cmp(&self.at)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Event list ordered by `(fire_time, insertion sequence)`.
///
/// Events with equal fire times pop in insertion order, which makes every run
/// with the same inputs replay exactly.
pub struct EventQueue<E> {
    heap: BinaryHeap<Scheduled<E>>,
    now: Time,
    next_seq: u64,
    processed: u64,
}

impl<E> Default for EventQueue<E> {
    fn default() -> Self {
        Self::new()
    }
}

impl<E> EventQueue<E> {
    pub fn new() -> Self {
        Self {
            heap: BinaryHeap::new(),
            now: 0.0,
            next_seq: 0,
            processed: 0,
        }
    }

    pub fn now(&self) -> Time {
        self.now
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    /// Total number of events popped so far.
    pub fn processed(&self) -> u64 {
        self.processed
    }

    /// Inserts an event firing at absolute time `at`.
    pub fn schedule(&mut self, at: Time, event: E) -> Result<()> {
        if !(at >= self.now) || !at.is_finite() {
            return Err(Error::ScheduleInPast { at, now: self.now });
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Scheduled { at, seq, event });
        Ok(())
    }

    pub fn schedule_in(&mut self, delay: Time, event: E) -> Result<()> {
        self.schedule(self.now + delay, event)
    }

    pub fn peek_time(&self) -> Option<Time> {
        self.heap.peek().map(|s| s.at)
    }

    /// Pops the next event if it fires no later than `t_end`, advancing the clock.
    pub fn pop_due(&mut self, t_end: Time) -> Option<(Time, E)> {
        if self.heap.peek()?.at > t_end {
            return None;
        }
        let s = self.heap.pop()?;
        debug_assert!(s.at >= self.now);
        self.now = s.at;
        self.processed += 1;
        Some((s.at, s.event))
    }

    /// Moves the clock forward to `t` without processing anything.
    pub fn advance_to(&mut self, t: Time) {
        if t > self.now {
            self.now = t;
        }
    }

    /// Processes every event with fire time `<= t_end` in order and leaves the
    /// clock at `t_end`. Returns the number of events processed.
    pub fn run_until<F>(&mut self, t_end: Time, mut handler: F) -> u64
    where
        F: FnMut(&mut Self, Time, E),
    {
        let mut count = 0;
        while let Some((at, event)) = self.pop_due(t_end) {
            handler(self, at, event);
            count += 1;
        }
        self.advance_to(t_end);
        count
    }

    /// Iterates over pending events in unspecified order.
    pub fn pending(&self) -> impl Iterator<Item = &E> {
        self.heap.iter().map(|s| &s.event)
    }
}

/// The stochastic sources of a trial. Each gets its own independent stream so
/// that, for example, changing the ant launch rate leaves the data traffic
/// realization untouched.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    SessionArrivals,
    AntRouting,
    DataRouting,
    TrafficSetup,
    TimerPhases,
}

impl Stream {
    fn id(self) -> u64 {
        match self {
            Stream::SessionArrivals => 1,
            Stream::AntRouting => 3,
            Stream::DataRouting => 4,
            Stream::TrafficSetup => 6,
            Stream::TimerPhases => 7,
        }
    }
}

/// Per-session streams start here so they never collide with the named ones.
const SESSION_STREAM_BASE: u64 = 1 << 32;

/// Factory for the named random substreams of one trial.
#[derive(Debug, Clone, Copy)]
pub struct RngStreams {
    master_seed: u64,
}

impl RngStreams {
    pub fn new(master_seed: u64) -> Self {
        Self { master_seed }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream(&self, which: Stream) -> ChaCha8Rng {
        self.numbered(which.id())
    }

    /// Stream owned by the `index`-th session created in the trial.
    pub fn session(&self, index: u64) -> ChaCha8Rng {
        self.numbered(SESSION_STREAM_BASE + index)
    }

    fn numbered(&self, id: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(id);
        rng
    }
}

/// Draws from the exponential distribution with the given mean. Draws are
/// strictly positive.
pub fn sample_exponential<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> Result<f64> {
    if !(mean > 0.0) || !mean.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "exponential mean must be positive and finite, got {mean}"
        )));
    }
    loop {
        let x: f64 = rng.sample(Exp1);
        if x > 0.0 {
            return Ok(x * mean);
        }
    }
}
