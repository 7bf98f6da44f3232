use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScheduleError {
    #[error("event at t={t} is before the current clock {now}")]
    InThePast { t: f64, now: f64 },
    #[error("event time is not finite")]
    NotFinite,
}

/// An entry in the event queue. Ordered by `(t, seq)`.
#[derive(Debug, Clone)]
pub struct Scheduled<P> {
    pub t: f64,
    pub seq: u64,
    pub payload: P,
}

impl<P> PartialEq for Scheduled<P> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<P> Eq for Scheduled<P> {}

impl<P> PartialOrd for Scheduled<P> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<P> Ord for Scheduled<P> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.t.total_cmp(&other.t).then(self.seq.cmp(&other.seq))
    }
}

/// Min-queue of timestamped events with a monotone clock. Events at equal
/// times run in the order they were scheduled.
#[derive(Debug)]
pub struct EventQueue<P> {
    heap: BinaryHeap<Reverse<Scheduled<P>>>,
    now: f64,
    next_seq: u64,
}

impl<P> Default for EventQueue<P> {
    fn default() -> Self {
        Self { heap: BinaryHeap::new(), now: 0.0, next_seq: 0 }
    }
}

impl<P> EventQueue<P> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn schedule(&mut self, t: f64, payload: P) -> Result<u64, ScheduleError> {
        if !t.is_finite() {
            return Err(ScheduleError::NotFinite);
        }
        if t < self.now {
            return Err(ScheduleError::InThePast { t, now: self.now });
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Reverse(Scheduled { t, seq, payload }));
        Ok(seq)
    }

    pub fn peek_time(&self) -> Option<f64> {
        self.heap.peek().map(|Reverse(e)| e.t)
    }

    /// Removes the earliest event and advances the clock to it.
    pub fn pop(&mut self) -> Option<Scheduled<P>> {
        let Reverse(e) = self.heap.pop()?;
        self.now = e.t;
        Some(e)
    }
}
