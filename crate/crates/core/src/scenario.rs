//! Scenario files: TOML, SI units (meters, seconds) without suffixes.
//!
//! ```toml
//! name = "reference"          # optional, default "default"; used in topic names
//! horizon = 600.0             # seconds, > 0
//!
//! [grid]
//! n = 4                       # cells per side, even, >= 2
//! r = 50.0                    # sensing range, cell side is 2r
//!
//! [topology]                  # optional
//! kind = "semi_automatic"     # semi_automatic | automatic_in_cloud | automatic_with_cloud
//! cloud_gated = false         # semi_automatic only
//! direct_actor_variation = false   # automatic_with_cloud only
//! authorization = "default"   # default | subscription_required
//! processing_site = "interface"    # interface | actor (automatic kinds)
//! filter = "accept_all"       # accept_all | reject_all | { quadrants = [0, 3] }
//!
//! [[fire_events]]             # zero or more
//! x = 200.0
//! y = 150.0
//! speed = 1.0                 # m/s, >= 0
//! t0 = 0.0                    # s, >= 0
//!
//! [network]                   # optional
//! wsan_latency_s = 0.005
//! cloud_latency_s = 0.05
//! drop_probability = 0.0      # [0, 1)
//! seed = 0
//!
//! [actors]                    # optional
//! speed = 1.0                 # m/s, > 0
//! service_time = 30.0         # s, >= 0
//!
//! [sensing]                   # optional
//! period = 1.0                # s, > 0
//!
//! [[subscriptions]]           # zero or more, all created at t = 0
//! subscriber = "ops"
//! topic_filter = "wsan/reference/quadrant/+/fire"
//! period = 10.0
//! ```
//!
//! Unknown keys are parse errors.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::geometry::{GridSpec, Point};
use crate::nodes::{DataFilter, ProcessingSite};
use crate::pubsub::{DispatchPolicy, TopicFilter};
use crate::topology::TopologyKind;

/// Largest grid accepted; keeps sensor ids and link tables modest.
pub const MAX_N: u32 = 256;
/// Upper bound on sensing ticks per sensor (`horizon / period`).
pub const MAX_TICKS: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default = "default_name")]
    pub name: String,
    pub horizon: f64,
    pub grid: GridConfig,
    #[serde(default)]
    pub topology: TopologySection,
    #[serde(default)]
    pub fire_events: Vec<FireSpec>,
    #[serde(default)]
    pub network: NetworkConfig,
    #[serde(default)]
    pub actors: ActorConfig,
    #[serde(default)]
    pub sensing: SensingConfig,
    #[serde(default)]
    pub subscriptions: Vec<SubscriptionSpec>,
}

fn default_name() -> String {
    "default".to_owned()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: u32,
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TopologySection {
    pub kind: TopologyKind,
    pub cloud_gated: bool,
    pub direct_actor_variation: bool,
    pub authorization: DispatchPolicy,
    pub processing_site: ProcessingSite,
    pub filter: DataFilter,
}

impl Default for TopologySection {
    fn default() -> Self {
        Self {
            kind: TopologyKind::SemiAutomatic,
            cloud_gated: false,
            direct_actor_variation: false,
            authorization: DispatchPolicy::Default,
            processing_site: ProcessingSite::Interface,
            filter: DataFilter::AcceptAll,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FireSpec {
    pub x: f64,
    pub y: f64,
    pub speed: f64,
    pub t0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NetworkConfig {
    pub wsan_latency_s: f64,
    pub cloud_latency_s: f64,
    pub drop_probability: f64,
    pub seed: u64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self { wsan_latency_s: 0.005, cloud_latency_s: 0.05, drop_probability: 0.0, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ActorConfig {
    pub speed: f64,
    pub service_time: f64,
}

impl Default for ActorConfig {
    fn default() -> Self {
        Self { speed: 1.0, service_time: 30.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SensingConfig {
    pub period: f64,
}

impl Default for SensingConfig {
    fn default() -> Self {
        Self { period: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubscriptionSpec {
    pub subscriber: String,
    pub topic_filter: String,
    pub period: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

/// Every violation found in a scenario, each tagged with its field path.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    fn push(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation { path: path.into(), message: message.into() });
    }

    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn mentions(&self, path: &str) -> bool {
        self.violations.iter().any(|v| v.path == path)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} violation(s):", self.violations.len())?;
        for v in &self.violations {
            writeln!(f, "  {}: {}", v.path, v.message)?;
        }
        Ok(())
    }
}

impl std::error::Error for ValidationReport {}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid scenario: {0}")]
    Invalid(#[from] ValidationReport),
}

fn positive(v: f64) -> bool {
    v.is_finite() && v > 0.0
}

fn non_negative(v: f64) -> bool {
    v.is_finite() && v >= 0.0
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> Result<Self, LoadError> {
        let s: Scenario = toml::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario serializes to TOML")
    }

    /// Grid spec for a validated scenario.
    pub fn grid_spec(&self) -> GridSpec {
        GridSpec::new(self.grid.n, self.grid.r).expect("scenario was validated")
    }

    /// SHA-256 over the scenario with the seed zeroed, so that seed overrides
    /// leave the hash unchanged.
    pub fn structure_hash(&self) -> String {
        let mut s = self.clone();
        s.network.seed = 0;
        let json = serde_json::to_string(&s).expect("scenario serializes to JSON");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    pub fn validate(&self) -> Result<(), ValidationReport> {
        let mut rep = ValidationReport::default();

        if self.name.is_empty() || self.name.contains(['/', '+', '#']) {
            rep.push("name", "must be a non-empty topic level without '/', '+' or '#'");
        }
        if !positive(self.horizon) {
            rep.push("horizon", "must be a positive finite number of seconds");
        }

        let spec = match GridSpec::new(self.grid.n, self.grid.r) {
            Ok(spec) => Some(spec),
            Err(_) => {
                if !positive(self.grid.r) {
                    rep.push("grid.r", "sensing range must be positive and finite");
                }
                if self.grid.n < 2 || !self.grid.n.is_multiple_of(2) {
                    rep.push("grid.n", "must be even and >= 2 so the area splits into four equal quadrants");
                }
                None
            }
        };
        if self.grid.n > MAX_N {
            rep.push("grid.n", format!("must not exceed {MAX_N}"));
        }

        let t = &self.topology;
        if t.cloud_gated && t.kind != TopologyKind::SemiAutomatic {
            rep.push("topology.cloud_gated", "only cluster heads can be cloud-gated (semi_automatic)");
        }
        if t.direct_actor_variation && t.kind != TopologyKind::AutomaticWithCloud {
            rep.push("topology.direct_actor_variation", "only applies to automatic_with_cloud");
        }
        if t.direct_actor_variation && t.processing_site != ProcessingSite::Interface {
            rep.push("topology.processing_site", "direct cloud-to-actor commands need interface-side processing");
        }
        if let DataFilter::Quadrants(qs) = &t.filter {
            if qs.iter().any(|&q| q > 3) {
                rep.push("topology.filter.quadrants", "quadrant numbers must be in 0..=3");
            }
        }

        for (i, f) in self.fire_events.iter().enumerate() {
            let p = format!("fire_events[{i}]");
            if !(non_negative(f.speed)) {
                rep.push(format!("{p}.speed"), "must be finite and >= 0");
            }
            if !(non_negative(f.t0)) {
                rep.push(format!("{p}.t0"), "must be finite and >= 0");
            }
            if let Some(spec) = &spec {
                if !spec.contains(Point::new(f.x, f.y)) {
                    rep.push(
                        format!("{p}.x/y"),
                        format!("ignition ({}, {}) lies outside the area [0, {side}) x [0, {side})", f.x, f.y, side = spec.side()),
                    );
                }
            }
        }

        let net = &self.network;
        if !non_negative(net.wsan_latency_s) {
            rep.push("network.wsan_latency_s", "must be finite and >= 0");
        }
        if !non_negative(net.cloud_latency_s) {
            rep.push("network.cloud_latency_s", "must be finite and >= 0");
        }
        if !(net.drop_probability >= 0.0 && net.drop_probability < 1.0) {
            rep.push("network.drop_probability", "must lie in [0, 1)");
        }

        if !positive(self.actors.speed) {
            rep.push("actors.speed", "must be positive and finite");
        }
        if !non_negative(self.actors.service_time) {
            rep.push("actors.service_time", "must be finite and >= 0");
        }

        if !positive(self.sensing.period) {
            rep.push("sensing.period", "must be positive and finite");
        } else if positive(self.horizon) && self.horizon / self.sensing.period > MAX_TICKS {
            rep.push("sensing.period", format!("horizon / period exceeds {MAX_TICKS} ticks"));
        }

        for (i, s) in self.subscriptions.iter().enumerate() {
            let p = format!("subscriptions[{i}]");
            if s.subscriber.is_empty() {
                rep.push(format!("{p}.subscriber"), "must not be empty");
            }
            if let Err(e) = TopicFilter::new(s.topic_filter.clone()) {
                rep.push(format!("{p}.topic_filter"), e.to_string());
            }
            if !positive(s.period) {
                rep.push(format!("{p}.period"), "must be positive and finite");
            } else if positive(self.horizon) && self.horizon / s.period > MAX_TICKS {
                rep.push(format!("{p}.period"), format!("horizon / period exceeds {MAX_TICKS} deliveries"));
            }
        }

        if rep.is_empty() {
            Ok(())
        } else {
            Err(rep)
        }
    }
}

pub fn load_and_validate(path: impl AsRef<Path>) -> Result<Scenario, LoadError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|source| LoadError::Io { path: path.display().to_string(), source })?;
    Scenario::from_toml_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        horizon = 100.0
        [grid]
        n = 4
        r = 50.0
    "#;

    fn report(text: &str) -> ValidationReport {
        match Scenario::from_toml_str(text) {
            Err(LoadError::Invalid(r)) => r,
            other => panic!("expected a validation report, got {other:?}"),
        }
    }

    #[test]
    fn minimal_file_gets_defaults() {
        let s = Scenario::from_toml_str(MINIMAL).unwrap();
        assert_eq!(s.name, "default");
        assert_eq!(s.topology.kind, TopologyKind::SemiAutomatic);
        assert_eq!(s.network.wsan_latency_s, 0.005);
        assert_eq!(s.sensing.period, 1.0);
        assert!(s.fire_events.is_empty());
    }

    #[test]
    fn odd_n_cites_quadrant_rule() {
        let r = report(&MINIMAL.replace("n = 4", "n = 3"));
        assert!(r.mentions("grid.n"));
        assert!(r.to_string().contains("quadrants"));
    }

    #[test]
    fn ignition_outside_area_cites_bounds() {
        let text = format!("{MINIMAL}\n[[fire_events]]\nx = 450.0\ny = 10.0\nspeed = 1.0\nt0 = 0.0\n");
        let r = report(&text);
        assert!(r.mentions("fire_events[0].x/y"));
        assert!(r.to_string().contains("outside the area"));
    }

    #[test]
    fn every_violation_reported() {
        let text = r#"
            name = "a/b"
            horizon = -1.0
            [grid]
            n = 3
            r = 0.0
            [topology]
            kind = "automatic_in_cloud"
            cloud_gated = true
            [[fire_events]]
            x = 1.0
            y = 1.0
            speed = -1.0
            t0 = 0.0
            [network]
            drop_probability = 1.0
            [actors]
            speed = 0.0
            [[subscriptions]]
            subscriber = ""
            topic_filter = "a/#/b"
            period = 0.0
        "#;
        let r = report(text);
        for path in [
            "name",
            "horizon",
            "grid.r",
            "grid.n",
            "topology.cloud_gated",
            "fire_events[0].speed",
            "network.drop_probability",
            "actors.speed",
            "subscriptions[0].subscriber",
            "subscriptions[0].topic_filter",
            "subscriptions[0].period",
        ] {
            assert!(r.mentions(path), "missing {path} in\n{r}");
        }
    }

    #[test]
    fn unknown_fields_are_errors() {
        let text = MINIMAL.replace("r = 50.0", "r = 50.0\nradius = 3.0");
        assert!(matches!(Scenario::from_toml_str(&text), Err(LoadError::Parse(_))));
        let text = format!("{MINIMAL}\n[network]\nlatency = 1.0\n");
        assert!(matches!(Scenario::from_toml_str(&text), Err(LoadError::Parse(_))));
    }

    #[test]
    fn filter_forms_parse() {
        let text = format!("{MINIMAL}\n[topology]\nkind = \"automatic_in_cloud\"\nfilter = {{ quadrants = [0, 3] }}\n");
        let s = Scenario::from_toml_str(&text).unwrap();
        assert_eq!(s.topology.filter, DataFilter::Quadrants(vec![0, 3]));
        let text = format!("{MINIMAL}\n[topology]\nfilter = \"reject_all\"\n");
        assert_eq!(Scenario::from_toml_str(&text).unwrap().topology.filter, DataFilter::RejectAll);
    }

    #[test]
    fn toml_round_trip_and_seed_free_hash() {
        let mut s = Scenario::from_toml_str(MINIMAL).unwrap();
        s.fire_events.push(FireSpec { x: 10.0, y: 20.0, speed: 0.5, t0: 1.0 });
        let back = Scenario::from_toml_str(&s.to_toml_string()).unwrap();
        assert_eq!(back, s);
        let mut seeded = s.clone();
        seeded.network.seed = 99;
        assert_eq!(seeded.structure_hash(), s.structure_hash());
        seeded.horizon = 5.0;
        assert_ne!(seeded.structure_hash(), s.structure_hash());
    }
}
