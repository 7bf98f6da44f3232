//! State machines for the four node roles. Each one is advanced only by the
//! engine's event loop and talks to the others through simulated messages.

mod actor;
mod beacon;
mod cluster_head;
mod interface;

use thiserror::Error;

use crate::geometry::GeometryError;

pub use actor::{plan_motion, ActorPhase, ActorState, CommandOutcome, MotionPlan, QueuedCommand};
pub use beacon::BeaconNodeState;
pub use cluster_head::{ChAction, ChMode, ChOutput, ClusterHeadState};
pub use interface::{
    DataFilter, Forward, IntegrationInterfaceState, InterfaceOutcome, ProcessingSite,
    StoredRecord,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NodeError {
    #[error("coordinates out of area: {0}")]
    OutOfArea(#[from] GeometryError),
    #[error("no deployed actor serves quadrant {0}")]
    UnknownActor(u16),
    #[error("command for actor {got} delivered to actor {expected}")]
    Misrouted { expected: u16, got: u16 },
    #[error("actor {aa}: {what} while {phase}")]
    BadPhase { aa: u16, what: &'static str, phase: &'static str },
}
