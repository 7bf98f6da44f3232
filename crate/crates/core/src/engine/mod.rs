//! Deterministic discrete-event core: clock and queue, simulated network,
//! the event loop, and trace/metrics emission.

mod metrics;
mod network;
mod queue;
mod sim;
mod trace;

use thiserror::Error;

use crate::nodes::NodeError;
use crate::protocol::CodecError;
use crate::pubsub::Rejection;
use crate::scenario::ValidationReport;
use crate::topology::WiringError;

pub use metrics::{FireMetrics, LinkCounters, Metrics, AREA_METHOD, CSV_COLUMNS};
pub use network::{NetworkModel, SendOutcome};
pub use queue::{EventQueue, ScheduleError, Scheduled};
pub use sim::{run, RunOutput};
pub use trace::{Trace, TraceHeader, TraceRecord, TRACE_FORMAT};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid scenario: {0}")]
    Validation(#[from] ValidationReport),
    #[error("wiring: {0}")]
    Wiring(#[from] WiringError),
    #[error("node: {0}")]
    Node(#[from] NodeError),
    #[error("scheduling: {0}")]
    Schedule(#[from] ScheduleError),
    #[error("codec: {0}")]
    Codec(#[from] CodecError),
    #[error("subscription: {0}")]
    Subscription(#[from] Rejection),
    #[error("unexpected message on {dst} port {port}")]
    Unexpected { dst: String, port: String },
}
