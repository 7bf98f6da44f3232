//! Discrete-event simulator for a wireless sensor and actor network (WSAN)
//! integrated with a cloud publish/subscribe layer, built around a forest
//! fire case study.
//!
//! Layering, bottom up: [`geometry`] and [`protocol`] are pure; [`fire`],
//! [`pubsub`] and [`nodes`] hold the per-entity state machines; [`topology`]
//! wires them; [`engine`] runs a [`scenario::Scenario`] to a trace and
//! metrics; [`cli`] is the command-line front end.

pub mod cli;
pub mod engine;
pub mod fire;
pub mod geometry;
pub mod nodes;
pub mod parallel;
pub mod protocol;
pub mod pubsub;
pub mod scenario;
pub mod topology;
