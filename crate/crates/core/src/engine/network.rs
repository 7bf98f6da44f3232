use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::queue::{EventQueue, ScheduleError};
use crate::topology::{LatencyClass, Link};

/// Constant per-class latency and independent Bernoulli drops. All
/// randomness comes from one seeded stream, consumed in send order.
#[derive(Debug, Clone)]
pub struct NetworkModel {
    pub wsan_latency: f64,
    pub cloud_latency: f64,
    pub drop_probability: f64,
    rng: ChaCha8Rng,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SendOutcome {
    Scheduled { at: f64, seq: u64 },
    Dropped,
}

impl NetworkModel {
    pub fn new(wsan_latency: f64, cloud_latency: f64, drop_probability: f64, seed: u64) -> Self {
        Self { wsan_latency, cloud_latency, drop_probability, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn latency(&self, class: LatencyClass) -> f64 {
        match class {
            LatencyClass::WsanLocal => self.wsan_latency,
            LatencyClass::WsanCloud => self.cloud_latency,
        }
    }

    /// Draws the drop decision. No randomness is consumed when drops are off.
    pub fn drops_next(&mut self) -> bool {
        self.drop_probability > 0.0 && self.rng.random_bool(self.drop_probability)
    }

    /// Sends over `link` at `t`: either schedules a delivery after the link's
    /// latency or reports a drop.
    pub fn send<P>(
        &mut self,
        queue: &mut EventQueue<P>,
        link: &Link,
        payload: P,
        t: f64,
    ) -> Result<SendOutcome, ScheduleError> {
        if self.drops_next() {
            return Ok(SendOutcome::Dropped);
        }
        let at = t + self.latency(link.class);
        let seq = queue.schedule(at, payload)?;
        Ok(SendOutcome::Scheduled { at, seq })
    }
}
