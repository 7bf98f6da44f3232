//! Per-fire latencies and per-link-class packet counts.
//!
//! CSV columns, in order:
//!
//! | column | meaning |
//! |---|---|
//! | `row` | `fire` or `total` |
//! | `fire_id`, `ignition_x`, `ignition_y`, `t0` | fire definition |
//! | `detection_latency_s` | first beacon emission − t0 |
//! | `dispatch_latency_s` | first actor command emission − t0 |
//! | `response_latency_s` | first arrival of an actor sent for this fire − t0 |
//! | `containment_time_s` | containment − t0 |
//! | `burned_area_m2` | burned area at containment (fire rows), sum over contained fires (total row) |
//! | `contained` | `true`/`false`; in the total row, whether every fire was contained |
//! | `{wsan_local,wsan_cloud}_{sent,delivered,dropped}` | packet counts (total row) |
//! | `pubsub_deliveries` | broker deliveries to subscribers (total row) |
//! | `area_method` | how burned area was computed |
//!
//! Empty cells mean "not applicable" or "never happened".

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::fire::FireId;
use crate::geometry::Point;
use crate::topology::LatencyClass;

pub const AREA_METHOD: &str = "exact_circle_rect";

pub const CSV_COLUMNS: [&str; 19] = [
    "row",
    "fire_id",
    "ignition_x",
    "ignition_y",
    "t0",
    "detection_latency_s",
    "dispatch_latency_s",
    "response_latency_s",
    "containment_time_s",
    "burned_area_m2",
    "contained",
    "wsan_local_sent",
    "wsan_local_delivered",
    "wsan_local_dropped",
    "wsan_cloud_sent",
    "wsan_cloud_delivered",
    "wsan_cloud_dropped",
    "pubsub_deliveries",
    "area_method",
];

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LinkCounters {
    pub sent: u64,
    pub delivered: u64,
    pub dropped: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FireMetrics {
    pub fire_id: FireId,
    pub ignition: Point,
    pub t0: f64,
    pub detected_at: Option<f64>,
    pub dispatched_at: Option<f64>,
    pub responded_at: Option<f64>,
    pub contained_at: Option<f64>,
    pub burned_area_at_containment: Option<f64>,
}

impl FireMetrics {
    pub fn new(fire_id: FireId, ignition: Point, t0: f64) -> Self {
        Self {
            fire_id,
            ignition,
            t0,
            detected_at: None,
            dispatched_at: None,
            responded_at: None,
            contained_at: None,
            burned_area_at_containment: None,
        }
    }

    pub fn detection_latency(&self) -> Option<f64> {
        self.detected_at.map(|t| t - self.t0)
    }

    pub fn dispatch_latency(&self) -> Option<f64> {
        self.dispatched_at.map(|t| t - self.t0)
    }

    pub fn response_latency(&self) -> Option<f64> {
        self.responded_at.map(|t| t - self.t0)
    }

    pub fn containment_time(&self) -> Option<f64> {
        self.contained_at.map(|t| t - self.t0)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Metrics {
    pub fires: Vec<FireMetrics>,
    pub links: BTreeMap<LatencyClass, LinkCounters>,
    pub pubsub_deliveries: u64,
}

fn first(slot: &mut Option<f64>, t: f64) {
    if slot.is_none() {
        *slot = Some(t);
    }
}

impl Metrics {
    pub fn new(fires: Vec<FireMetrics>) -> Self {
        let links = LatencyClass::ALL.iter().map(|&c| (c, LinkCounters::default())).collect();
        Self { fires, links, pubsub_deliveries: 0 }
    }

    pub fn fire(&self, id: FireId) -> Option<&FireMetrics> {
        self.fires.iter().find(|f| f.fire_id == id)
    }

    fn fire_mut(&mut self, id: FireId) -> Option<&mut FireMetrics> {
        self.fires.iter_mut().find(|f| f.fire_id == id)
    }

    pub fn link(&self, class: LatencyClass) -> LinkCounters {
        self.links.get(&class).copied().unwrap_or_default()
    }

    pub fn total_sent(&self) -> u64 {
        self.links.values().map(|c| c.sent).sum()
    }

    // Reports arriving after containment are late news about a frozen fire
    // and leave the latencies alone.
    pub(crate) fn on_detection(&mut self, id: FireId, t: f64) {
        if let Some(f) = self.fire_mut(id).filter(|f| f.contained_at.is_none()) {
            first(&mut f.detected_at, t);
        }
    }

    pub(crate) fn on_dispatch(&mut self, id: FireId, t: f64) {
        if let Some(f) = self.fire_mut(id).filter(|f| f.contained_at.is_none()) {
            first(&mut f.dispatched_at, t);
        }
    }

    pub(crate) fn on_response(&mut self, id: FireId, t: f64) {
        if let Some(f) = self.fire_mut(id).filter(|f| f.contained_at.is_none()) {
            first(&mut f.responded_at, t);
        }
    }

    pub(crate) fn on_containment(&mut self, id: FireId, t: f64, area: f64) {
        if let Some(f) = self.fire_mut(id) {
            if f.contained_at.is_none() {
                f.contained_at = Some(t);
                f.burned_area_at_containment = Some(area);
            }
        }
    }

    pub(crate) fn counters(&mut self, class: LatencyClass) -> &mut LinkCounters {
        self.links.entry(class).or_default()
    }

    pub fn all_contained(&self) -> bool {
        self.fires.iter().all(|f| f.contained_at.is_some())
    }

    pub fn to_csv(&self) -> String {
        fn opt(v: Option<f64>) -> String {
            v.map(|x| x.to_string()).unwrap_or_default()
        }
        let mut out = CSV_COLUMNS.join(",");
        out.push('\n');
        for f in &self.fires {
            let cells = [
                "fire".to_owned(),
                f.fire_id.0.to_string(),
                f.ignition.x.to_string(),
                f.ignition.y.to_string(),
                f.t0.to_string(),
                opt(f.detection_latency()),
                opt(f.dispatch_latency()),
                opt(f.response_latency()),
                opt(f.containment_time()),
                opt(f.burned_area_at_containment),
                f.contained_at.is_some().to_string(),
            ];
            let _ = writeln!(out, "{},,,,,,,,{AREA_METHOD}", cells.join(","));
        }
        let local = self.link(LatencyClass::WsanLocal);
        let cloud = self.link(LatencyClass::WsanCloud);
        let area: f64 = self.fires.iter().filter_map(|f| f.burned_area_at_containment).sum();
        let _ = writeln!(
            out,
            "total,,,,,,,,,{area},{},{},{},{},{},{},{},{},{AREA_METHOD}",
            self.all_contained(),
            local.sent,
            local.delivered,
            local.dropped,
            cloud.sent,
            cloud.delivered,
            cloud.dropped,
            self.pubsub_deliveries,
        );
        out
    }
}
