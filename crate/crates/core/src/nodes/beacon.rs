use std::collections::BTreeSet;

use crate::fire::{FireId, FireState};
use crate::geometry::{Point, SensorSite};
use crate::protocol::BeaconNodePacket;

/// A sensor sampling its surroundings every `sensing_period` seconds.
#[derive(Debug, Clone)]
pub struct BeaconNodeState {
    pub id: u32,
    pub position: Point,
    pub chno_assigned: u16,
    pub sensing_period: f64,
    pub range: f64,
    reported: BTreeSet<FireId>,
}

impl BeaconNodeState {
    pub fn new(site: &SensorSite, range: f64, sensing_period: f64) -> Self {
        Self {
            id: site.id,
            position: site.position,
            chno_assigned: site.chno,
            sensing_period,
            range,
            reported: BTreeSet::new(),
        }
    }

    /// Instant of the k-th sensing tick.
    pub fn tick(&self, k: u64) -> f64 {
        k as f64 * self.sensing_period
    }

    pub fn has_reported(&self, fire: FireId) -> bool {
        self.reported.contains(&fire)
    }

    /// Samples one fire. Emits at most one packet per fire over the node's life.
    pub fn on_sample(&mut self, fire: &FireState, t: f64) -> Option<BeaconNodePacket> {
        let id = fire.event.fire_id;
        if self.reported.contains(&id) || !fire.detectable_at(self.position, self.range, t) {
            return None;
        }
        self.reported.insert(id);
        Some(BeaconNodePacket {
            xc: self.position.x,
            yc: self.position.y,
            chno: self.chno_assigned,
        })
    }
}
