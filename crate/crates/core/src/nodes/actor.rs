use std::collections::VecDeque;

use super::NodeError;
use crate::fire::FireId;
use crate::geometry::{actor_heading, actor_travel_distance, quadrant_of, ActorSite, GridSpec, Point};
use crate::protocol::{BeaconNodePacket, ClusterHeadNodePacket};

/// Straight-line plan from the actor's position to a target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionPlan {
    pub origin: Point,
    pub target: Point,
    pub distance: f64,
    /// `None` when the actor is already at the target.
    pub heading: Option<f64>,
    pub eta: f64,
}

pub fn plan_motion(from: Point, to: Point, speed: f64, t: f64) -> MotionPlan {
    let (dx, dy) = (to.x - from.x, to.y - from.y);
    let distance = actor_travel_distance(dx, dy);
    MotionPlan {
        origin: from,
        target: to,
        distance,
        heading: actor_heading(dx, dy).ok(),
        eta: t + distance / speed,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ActorPhase {
    Idle,
    Moving { plan: MotionPlan, departed_at: f64, fire: Option<FireId> },
    Extinguishing { until: f64, fire: Option<FireId> },
}

impl ActorPhase {
    pub fn name(&self) -> &'static str {
        match self {
            ActorPhase::Idle => "idle",
            ActorPhase::Moving { .. } => "moving",
            ActorPhase::Extinguishing { .. } => "extinguishing",
        }
    }

    fn code(&self) -> u8 {
        match self {
            ActorPhase::Idle => 0,
            ActorPhase::Moving { .. } => 1,
            ActorPhase::Extinguishing { .. } => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueuedCommand {
    pub command: ClusterHeadNodePacket,
    pub fire: Option<FireId>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CommandOutcome {
    /// Departed. When `plan.distance == 0` the actor is already extinguishing.
    Started(MotionPlan),
    Queued { depth: usize },
}

#[derive(Debug, Clone)]
pub struct ActorState {
    pub aa: u16,
    pub home: Point,
    pub current: Point,
    pub speed: f64,
    pub service_time: f64,
    phase: ActorPhase,
    queue: VecDeque<QueuedCommand>,
}

impl ActorState {
    pub fn new(site: &ActorSite, speed: f64, service_time: f64) -> Self {
        Self {
            aa: site.aa,
            home: site.home,
            current: site.home,
            speed,
            service_time,
            phase: ActorPhase::Idle,
            queue: VecDeque::new(),
        }
    }

    pub fn phase(&self) -> ActorPhase {
        self.phase
    }

    pub fn queued(&self) -> usize {
        self.queue.len()
    }

    /// Position at `t`, interpolated along the current segment while moving.
    pub fn position_at(&self, t: f64) -> Point {
        match self.phase {
            ActorPhase::Moving { plan, departed_at, .. } if plan.distance > 0.0 => {
                let frac = ((t - departed_at) * self.speed / plan.distance).clamp(0.0, 1.0);
                Point::new(
                    plan.origin.x + frac * (plan.target.x - plan.origin.x),
                    plan.origin.y + frac * (plan.target.y - plan.origin.y),
                )
            }
            _ => self.current,
        }
    }

    pub fn on_command(
        &mut self,
        cmd: &ClusterHeadNodePacket,
        fire: Option<FireId>,
        t: f64,
    ) -> Result<CommandOutcome, NodeError> {
        if cmd.aa != self.aa {
            return Err(NodeError::Misrouted { expected: self.aa, got: cmd.aa });
        }
        if self.phase != ActorPhase::Idle {
            self.queue.push_back(QueuedCommand { command: *cmd, fire });
            return Ok(CommandOutcome::Queued { depth: self.queue.len() });
        }
        Ok(CommandOutcome::Started(self.start(cmd, fire, t)))
    }

    /// Actor-side processing: derive the command from raw sensed data.
    pub fn on_raw_beacon(
        &mut self,
        p: &BeaconNodePacket,
        spec: &GridSpec,
        fire: Option<FireId>,
        t: f64,
    ) -> Result<CommandOutcome, NodeError> {
        let cmd = self.command_from_beacon(p, spec)?;
        self.on_command(&cmd, fire, t)
    }

    pub fn command_from_beacon(
        &self,
        p: &BeaconNodePacket,
        spec: &GridSpec,
    ) -> Result<ClusterHeadNodePacket, NodeError> {
        let qno = quadrant_of(Point::new(p.xc, p.yc), spec)?;
        if qno.0 != self.aa {
            return Err(NodeError::Misrouted { expected: self.aa, got: qno.0 });
        }
        Ok(ClusterHeadNodePacket { xc: p.xc, yc: p.yc, qno: qno.0, aa: self.aa })
    }

    fn start(&mut self, cmd: &ClusterHeadNodePacket, fire: Option<FireId>, t: f64) -> MotionPlan {
        let plan = plan_motion(self.current, Point::new(cmd.xc, cmd.yc), self.speed, t);
        self.phase = if plan.distance == 0.0 {
            ActorPhase::Extinguishing { until: t + self.service_time, fire }
        } else {
            ActorPhase::Moving { plan, departed_at: t, fire }
        };
        plan
    }

    /// Reaches the target; returns when extinguishing will finish.
    pub fn on_arrival(&mut self, t: f64) -> Result<f64, NodeError> {
        let ActorPhase::Moving { plan, fire, .. } = self.phase else {
            return Err(NodeError::BadPhase { aa: self.aa, what: "arrival", phase: self.phase.name() });
        };
        self.current = plan.target;
        let until = t + self.service_time;
        self.phase = ActorPhase::Extinguishing { until, fire };
        Ok(until)
    }

    /// Finishes extinguishing and goes idle. Hands back the next queued
    /// command, which the caller feeds to [`ActorState::on_command`].
    pub fn on_extinguish_complete(&mut self) -> Result<Option<QueuedCommand>, NodeError> {
        if !matches!(self.phase, ActorPhase::Extinguishing { .. }) {
            return Err(NodeError::BadPhase {
                aa: self.aa,
                what: "extinguish completion",
                phase: self.phase.name(),
            });
        }
        self.phase = ActorPhase::Idle;
        Ok(self.queue.pop_front())
    }

    /// Status payload: `[phase u8][x f64 LE][y f64 LE]`.
    pub fn status_payload(&self, t: f64) -> Vec<u8> {
        let p = self.position_at(t);
        let mut out = Vec::with_capacity(17);
        out.push(self.phase.code());
        out.extend_from_slice(&p.x.to_le_bytes());
        out.extend_from_slice(&p.y.to_le_bytes());
        out
    }
}
