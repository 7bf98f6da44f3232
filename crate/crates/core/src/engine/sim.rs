use std::collections::BTreeSet;

use super::metrics::{FireMetrics, Metrics};
use super::network::{NetworkModel, SendOutcome};
use super::queue::EventQueue;
use super::trace::{Trace, TraceHeader, TraceRecord, TRACE_FORMAT};
use super::EngineError;
use crate::fire::{burned_area, first_detection_time, FireEvent, FireId, FireState};
use crate::geometry::{plan_deployment, Deployment, Point};
use crate::nodes::{
    ActorPhase, ActorState, BeaconNodeState, ChAction, ChMode, ClusterHeadState, CommandOutcome,
    Forward, IntegrationInterfaceState, InterfaceOutcome,
};
use crate::protocol::{decode_beacon, decode_cluster_head, encode_beacon, encode_cluster_head, WireFrame};
use crate::pubsub::{topics, Authorization, Broker, Delivery, SubId, Subscription, TopicFilter, Update};
use crate::scenario::Scenario;
use crate::topology::{build_topology, ports, LatencyClass, NodeRef, TopologyConfig, TopologyKind, Wiring};

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub trace: Trace,
    pub metrics: Metrics,
    pub all_contained: bool,
}

#[derive(Debug, Clone)]
enum Body {
    Frame(WireFrame),
    Status(Vec<u8>),
    Publish(Update),
    AuthRequest { request: u64, detection: Update },
    AuthReply { request: u64, granted: bool },
    /// Interface asks the cloud to command an actor directly.
    CommandRequest(WireFrame),
    Delivery(Delivery),
}

impl Body {
    fn bytes(&self) -> Vec<u8> {
        match self {
            Body::Frame(f) | Body::CommandRequest(f) => f.as_bytes().to_vec(),
            Body::Status(b) => b.clone(),
            Body::Publish(u) | Body::AuthRequest { detection: u, .. } => u.payload.clone(),
            Body::AuthReply { request, granted } => {
                let mut v = request.to_le_bytes().to_vec();
                v.push(u8::from(*granted));
                v
            }
            Body::Delivery(d) => d.update.payload.clone(),
        }
    }

    fn topic(&self) -> Option<&str> {
        match self {
            Body::Publish(u) | Body::AuthRequest { detection: u, .. } => Some(&u.topic),
            Body::Delivery(d) => Some(&d.update.topic),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
struct Message {
    src: NodeRef,
    dst: NodeRef,
    port: &'static str,
    class: LatencyClass,
    body: Body,
    fire: Option<FireId>,
}

#[derive(Debug, Clone)]
enum Event {
    FireIgnition(usize),
    SensingTick { sensor: usize, fire: usize },
    Deliver(Message),
    ActorArrival(u16),
    ExtinguishComplete(u16),
    PubsubTick(SubId),
}

struct Sim<'a> {
    sc: &'a Scenario,
    d: Deployment,
    wiring: Wiring,
    q: EventQueue<Event>,
    net: NetworkModel,
    fires: Vec<FireState>,
    ignited: Vec<bool>,
    sensors: Vec<BeaconNodeState>,
    chs: Vec<ClusterHeadState>,
    actors: Vec<ActorState>,
    iface: Option<IntegrationInterfaceState>,
    broker: Broker,
    metrics: Metrics,
    records: Vec<TraceRecord>,
}

/// First sensing tick `k·period` at or after `t`.
fn first_tick_at_or_after(t: f64, period: f64) -> f64 {
    let mut k = (t / period).ceil().max(0.0);
    while k * period < t {
        k += 1.0;
    }
    while k > 0.0 && (k - 1.0) * period >= t {
        k -= 1.0;
    }
    k * period
}

fn fire_of(m: &Message) -> Result<FireId, EngineError> {
    m.fire.ok_or_else(|| unexpected(m))
}

fn unexpected(m: &Message) -> EngineError {
    EngineError::Unexpected { dst: m.dst.to_string(), port: m.port.to_owned() }
}

fn frame_of(m: &Message) -> Result<&WireFrame, EngineError> {
    match &m.body {
        Body::Frame(f) => Ok(f),
        _ => Err(unexpected(m)),
    }
}

/// Runs a scenario to its horizon or until nothing is left to happen.
pub fn run(sc: &Scenario) -> Result<RunOutput, EngineError> {
    sc.validate()?;
    let spec = sc.grid_spec();
    let d = plan_deployment(&spec);

    let mut cfg = TopologyConfig::new(sc.topology.kind);
    cfg.direct_actor_variation = sc.topology.direct_actor_variation;
    cfg.processing_site = sc.topology.processing_site;
    let monitors: BTreeSet<String> = sc.subscriptions.iter().map(|s| s.subscriber.clone()).collect();
    if !monitors.is_empty() {
        cfg.monitors = monitors.into_iter().collect();
    }
    let wiring = build_topology(&cfg, &d)?;

    let fires: Vec<FireState> = sc
        .fire_events
        .iter()
        .enumerate()
        .map(|(i, f)| {
            FireState::new(FireEvent {
                fire_id: FireId(i as u32),
                ignition: Point::new(f.x, f.y),
                speed: f.speed,
                t0: f.t0,
            })
        })
        .collect();
    let metrics = Metrics::new(
        fires.iter().map(|f| FireMetrics::new(f.event.fire_id, f.event.ignition, f.event.t0)).collect(),
    );
    let ch_mode = if sc.topology.cloud_gated { ChMode::CloudGated } else { ChMode::Direct };
    let chs = match sc.topology.kind {
        TopologyKind::SemiAutomatic => d
            .cluster_heads
            .iter()
            .map(|c| ClusterHeadState::new(c, ch_mode, f64::INFINITY, &sc.name))
            .collect(),
        _ => Vec::new(),
    };
    let iface = sc.topology.kind.is_automatic().then(|| {
        IntegrationInterfaceState::new(sc.topology.filter.clone(), sc.topology.processing_site, f64::INFINITY)
    });

    let header = TraceHeader {
        format: TRACE_FORMAT,
        tool_version: env!("CARGO_PKG_VERSION"),
        scenario: sc.name.clone(),
        scenario_hash: sc.structure_hash(),
        seed: sc.network.seed,
        wiring: serde_json::to_value(&wiring).expect("wiring serializes"),
    };

    let mut sim = Sim {
        sc,
        sensors: d.sensors.iter().map(|s| BeaconNodeState::new(s, sc.grid.r, sc.sensing.period)).collect(),
        actors: d.actors.iter().map(|a| ActorState::new(a, sc.actors.speed, sc.actors.service_time)).collect(),
        d,
        wiring,
        q: EventQueue::new(),
        net: NetworkModel::new(
            sc.network.wsan_latency_s,
            sc.network.cloud_latency_s,
            sc.network.drop_probability,
            sc.network.seed,
        ),
        ignited: vec![false; fires.len()],
        fires,
        chs,
        iface,
        broker: Broker::new(sc.topology.authorization),
        metrics,
        records: Vec::new(),
    };
    sim.start()?;
    sim.event_loop()?;

    let all_contained = sim.metrics.all_contained();
    Ok(RunOutput { trace: Trace { header, records: sim.records }, metrics: sim.metrics, all_contained })
}

impl Sim<'_> {
    fn start(&mut self) -> Result<(), EngineError> {
        let horizon = self.sc.horizon;
        for (i, s) in self.sc.subscriptions.iter().enumerate() {
            let sub = Subscription {
                sub_id: SubId(i as u64),
                subscriber: s.subscriber.clone(),
                topic_filter: TopicFilter::new(s.topic_filter.clone()).map_err(|_| EngineError::Unexpected {
                    dst: "broker".into(),
                    port: ports::SUBSCRIBE.into(),
                })?,
                period: s.period,
                created_at: 0.0,
            };
            let ack = self.broker.subscribe(sub)?;
            self.records.push(TraceRecord {
                t: 0.0,
                kind: "subscribe",
                src: NodeRef::Monitor(s.subscriber.clone()).to_string(),
                dst: NodeRef::Broker.to_string(),
                port: ports::SUBSCRIBE.into(),
                payload: String::new(),
                fire: None,
                detail: Some(format!("{} every {} s", s.topic_filter, s.period)),
            });
            if ack.first_delivery <= horizon {
                self.q.schedule(ack.first_delivery, Event::PubsubTick(ack.sub_id))?;
            }
        }
        for (i, f) in self.fires.iter().enumerate() {
            if f.event.t0 <= horizon {
                self.q.schedule(f.event.t0, Event::FireIgnition(i))?;
            }
        }
        Ok(())
    }

    fn event_loop(&mut self) -> Result<(), EngineError> {
        let horizon = self.sc.horizon;
        while self.q.peek_time().is_some_and(|t| t <= horizon) {
            let ev = self.q.pop().expect("peeked");
            self.handle(ev.payload, ev.t)?;
        }
        // whatever is still on the wire never arrives
        while let Some(ev) = self.q.pop() {
            if let Event::Deliver(m) = ev.payload {
                self.metrics.counters(m.class).dropped += 1;
                self.trace_msg(horizon, "drop", &m, Some("horizon"));
            }
        }
        Ok(())
    }

    fn note(&mut self, t: f64, kind: &'static str, node: String, fire: Option<FireId>, detail: Option<String>) {
        self.records.push(TraceRecord {
            t,
            kind,
            src: node.clone(),
            dst: node,
            port: String::new(),
            payload: String::new(),
            fire: fire.map(|f| f.0),
            detail,
        });
    }

    fn trace_msg(&mut self, t: f64, kind: &'static str, m: &Message, extra: Option<&str>) {
        let mut detail = m.class.name().to_owned();
        if let Some(topic) = m.body.topic() {
            detail.push(' ');
            detail.push_str(topic);
        }
        if let Some(x) = extra {
            detail.push(' ');
            detail.push_str(x);
        }
        self.records.push(TraceRecord {
            t,
            kind,
            src: m.src.to_string(),
            dst: m.dst.to_string(),
            port: m.port.to_owned(),
            payload: hex::encode(m.body.bytes()),
            fire: m.fire.map(|f| f.0),
            detail: Some(detail),
        });
    }

    fn send(
        &mut self,
        src: NodeRef,
        dst: NodeRef,
        port: &'static str,
        body: Body,
        fire: Option<FireId>,
        t: f64,
    ) -> Result<(), EngineError> {
        let link = self.wiring.link(&src, &dst, port)?;
        let m = Message { src, dst, port, class: link.class, body, fire };
        self.metrics.counters(m.class).sent += 1;
        self.trace_msg(t, "send", &m, None);
        let link = self.wiring.link(&m.src, &m.dst, port)?;
        let probe = m.clone();
        match self.net.send(&mut self.q, link, Event::Deliver(m), t)? {
            SendOutcome::Scheduled { .. } => {}
            SendOutcome::Dropped => {
                self.metrics.counters(probe.class).dropped += 1;
                self.trace_msg(t, "drop", &probe, None);
            }
        }
        Ok(())
    }

    fn handle(&mut self, ev: Event, t: f64) -> Result<(), EngineError> {
        match ev {
            Event::FireIgnition(i) => self.on_ignition(i, t),
            Event::SensingTick { sensor, fire } => self.on_sensing(sensor, fire, t),
            Event::Deliver(m) => {
                self.metrics.counters(m.class).delivered += 1;
                self.trace_msg(t, "deliver", &m, None);
                self.on_message(m, t)
            }
            Event::ActorArrival(aa) => self.on_arrival(aa, t),
            Event::ExtinguishComplete(aa) => self.on_extinguished(aa, t),
            Event::PubsubTick(id) => self.on_pubsub_tick(id, t),
        }
    }

    fn on_ignition(&mut self, i: usize, t: f64) -> Result<(), EngineError> {
        self.ignited[i] = true;
        let ev = self.fires[i].event;
        self.note(
            t,
            "fire_ignition",
            "environment".into(),
            Some(ev.fire_id),
            Some(format!("at ({}, {}) speed {}", ev.ignition.x, ev.ignition.y, ev.speed)),
        );
        // Sensing is sampled only at the first tick that could report this
        // fire; earlier ticks are silent and containment can only delay detection.
        let period = self.sc.sensing.period;
        let mut ticks = Vec::new();
        for (s, node) in self.sensors.iter().enumerate() {
            if let Some(td) = first_detection_time(&ev, node.position, node.range) {
                let tick = first_tick_at_or_after(td, period);
                if tick <= self.sc.horizon {
                    ticks.push((tick, s));
                }
            }
        }
        for (tick, sensor) in ticks {
            self.q.schedule(tick, Event::SensingTick { sensor, fire: i })?;
        }
        Ok(())
    }

    fn on_sensing(&mut self, sensor: usize, fire: usize, t: f64) -> Result<(), EngineError> {
        let f = self.fires[fire];
        let Some(p) = self.sensors[sensor].on_sample(&f, t) else {
            return Ok(());
        };
        let fid = f.event.fire_id;
        let src = NodeRef::Sensor(self.sensors[sensor].id);
        self.metrics.on_detection(fid, t);
        self.note(t, "detection", src.to_string(), Some(fid), None);
        let dst = match self.sc.topology.kind {
            TopologyKind::SemiAutomatic => NodeRef::ClusterHead(p.chno),
            _ => NodeRef::Interface,
        };
        self.send(src, dst, ports::BEACON, Body::Frame(encode_beacon(&p)?), Some(fid), t)
    }

    fn on_message(&mut self, m: Message, t: f64) -> Result<(), EngineError> {
        match (&m.dst, m.port) {
            (NodeRef::ClusterHead(c), ports::BEACON) => self.ch_beacon(*c, &m, t),
            (NodeRef::ClusterHead(c), ports::CLUSTER_HEAD) => {
                let Body::Status(payload) = &m.body else { return Err(unexpected(&m)) };
                let u = Update { topic: topics::actor_status(&self.sc.name, *c), payload: payload.clone(), published_at: t };
                self.send(m.dst.clone(), NodeRef::Broker, ports::PUBLISH, Body::Publish(u), m.fire, t)
            }
            (NodeRef::ClusterHead(c), ports::AUTHORIZE) => {
                let Body::AuthReply { request, granted } = m.body else { return Err(unexpected(&m)) };
                let c = *c;
                match self.chs[c as usize].on_authorization(request, granted) {
                    Some(cmd) => self.ch_dispatch(c, cmd, fire_of(&m)?, t),
                    None => {
                        self.note(t, "dispatch_denied", m.dst.to_string(), m.fire, None);
                        Ok(())
                    }
                }
            }
            (NodeRef::Broker, ports::PUBLISH) => self.broker_in(&m, t),
            (NodeRef::Actor(a), ports::CLUSTER_HEAD | ports::ACTOR_COMMAND) => {
                let cmd = decode_cluster_head(frame_of(&m)?)?;
                let a = *a;
                let outcome = self.actors[a as usize].on_command(&cmd, m.fire, t)?;
                self.after_command(a, outcome, m.fire, t)
            }
            (NodeRef::Actor(a), ports::RAW_DATA) => {
                let p = decode_beacon(frame_of(&m)?)?;
                let a = *a;
                let cmd = self.actors[a as usize].command_from_beacon(&p, &self.d.spec)?;
                let fire = fire_of(&m)?;
                self.metrics.on_dispatch(fire, t);
                self.note(t, "dispatch", m.dst.to_string(), Some(fire), None);
                let outcome = self.actors[a as usize].on_command(&cmd, Some(fire), t)?;
                self.after_command(a, outcome, Some(fire), t)
            }
            (NodeRef::Interface, ports::BEACON) => self.interface_data(&m, t),
            (NodeRef::Interface, ports::STATUS) => {
                let (NodeRef::Actor(a), Body::Status(payload)) = (&m.src, &m.body) else {
                    return Err(unexpected(&m));
                };
                let u = Update { topic: topics::actor_status(&self.sc.name, *a), payload: payload.clone(), published_at: t };
                self.interface_publish(u, m.fire, t)
            }
            (NodeRef::Monitor(_), ports::SUBSCRIPTION) => Ok(()),
            _ => Err(unexpected(&m)),
        }
    }

    fn ch_beacon(&mut self, c: u16, m: &Message, t: f64) -> Result<(), EngineError> {
        let p = decode_beacon(frame_of(m)?)?;
        let fire = fire_of(m)?;
        let out = self.chs[c as usize].on_beacon(&p, fire, &self.d, t)?;
        let ch = NodeRef::ClusterHead(c);
        self.send(ch.clone(), NodeRef::Broker, ports::PUBLISH, Body::Publish(out.monitoring), Some(fire), t)?;
        match out.action {
            ChAction::Dispatch(cmd) => self.ch_dispatch(c, cmd, fire, t),
            ChAction::RequestAuthorization { request, detection } => self.send(
                ch,
                NodeRef::Broker,
                ports::PUBLISH,
                Body::AuthRequest { request, detection },
                Some(fire),
                t,
            ),
            ChAction::Suppressed => {
                self.note(t, "suppressed", ch.to_string(), Some(fire), None);
                Ok(())
            }
        }
    }

    fn ch_dispatch(
        &mut self,
        c: u16,
        cmd: crate::protocol::ClusterHeadNodePacket,
        fire: FireId,
        t: f64,
    ) -> Result<(), EngineError> {
        self.metrics.on_dispatch(fire, t);
        let ch = NodeRef::ClusterHead(c);
        self.note(t, "dispatch", ch.to_string(), Some(fire), Some(format!("actor {}", cmd.aa)));
        let frame = encode_cluster_head(&cmd)?;
        self.send(ch, NodeRef::Actor(cmd.aa), ports::CLUSTER_HEAD, Body::Frame(frame), Some(fire), t)
    }

    fn broker_in(&mut self, m: &Message, t: f64) -> Result<(), EngineError> {
        match &m.body {
            Body::Publish(u) => {
                self.broker.publish(u.clone());
                Ok(())
            }
            Body::AuthRequest { request, detection } => {
                self.broker.publish(detection.clone());
                let granted = self.broker.authorize_dispatch(detection) == Authorization::Granted;
                self.note(
                    t,
                    "authorization",
                    NodeRef::Broker.to_string(),
                    m.fire,
                    Some(if granted { "granted" } else { "denied" }.into()),
                );
                let reply = Body::AuthReply { request: *request, granted };
                self.send(NodeRef::Broker, m.src.clone(), ports::AUTHORIZE, reply, m.fire, t)
            }
            Body::CommandRequest(frame) => {
                let cmd = decode_cluster_head(frame)?;
                let body = Body::Frame(frame.clone());
                self.send(NodeRef::Broker, NodeRef::Actor(cmd.aa), ports::ACTOR_COMMAND, body, m.fire, t)
            }
            _ => Err(unexpected(m)),
        }
    }

    fn interface_publish(&mut self, u: Update, fire: Option<FireId>, t: f64) -> Result<(), EngineError> {
        match self.sc.topology.kind {
            TopologyKind::AutomaticWithCloud => {
                self.send(NodeRef::Interface, NodeRef::Broker, ports::PUBLISH, Body::Publish(u), fire, t)
            }
            _ => {
                // the interface lives in the cloud and writes to the broker directly
                self.records.push(TraceRecord {
                    t,
                    kind: "publish",
                    src: NodeRef::Interface.to_string(),
                    dst: NodeRef::Broker.to_string(),
                    port: String::new(),
                    payload: hex::encode(&u.payload),
                    fire: fire.map(|f| f.0),
                    detail: Some(u.topic.clone()),
                });
                self.broker.publish(u);
                Ok(())
            }
        }
    }

    fn interface_data(&mut self, m: &Message, t: f64) -> Result<(), EngineError> {
        let frame = frame_of(m)?;
        let p = decode_beacon(frame)?;
        let fire = fire_of(m)?;
        let iface = self.iface.as_mut().ok_or_else(|| unexpected(m))?;
        let (qno, forward) = match iface.on_data(&p, fire, &self.d, t)? {
            InterfaceOutcome::Rejected => {
                self.note(t, "filtered", NodeRef::Interface.to_string(), Some(fire), None);
                return Ok(());
            }
            InterfaceOutcome::Stored { qno, forward } => (qno, forward),
        };
        let u = Update {
            topic: topics::quadrant_fire(&self.sc.name, qno),
            payload: frame.as_bytes().to_vec(),
            published_at: t,
        };
        self.interface_publish(u, Some(fire), t)?;
        let iface_ref = NodeRef::Interface;
        match forward {
            None => {
                self.note(t, "suppressed", iface_ref.to_string(), Some(fire), None);
                Ok(())
            }
            Some(Forward::Command(cmd)) => {
                self.metrics.on_dispatch(fire, t);
                self.note(t, "dispatch", iface_ref.to_string(), Some(fire), Some(format!("actor {}", cmd.aa)));
                let frame = encode_cluster_head(&cmd)?;
                if self.sc.topology.direct_actor_variation {
                    self.send(iface_ref, NodeRef::Broker, ports::PUBLISH, Body::CommandRequest(frame), Some(fire), t)
                } else {
                    let dst = NodeRef::Actor(cmd.aa);
                    self.send(iface_ref, dst, ports::ACTOR_COMMAND, Body::Frame(frame), Some(fire), t)
                }
            }
            Some(Forward::Raw { actor, packet }) => {
                let body = Body::Frame(encode_beacon(&packet)?);
                self.send(iface_ref, NodeRef::Actor(actor), ports::RAW_DATA, body, Some(fire), t)
            }
        }
    }

    fn after_command(
        &mut self,
        aa: u16,
        outcome: CommandOutcome,
        fire: Option<FireId>,
        t: f64,
    ) -> Result<(), EngineError> {
        let node = NodeRef::Actor(aa).to_string();
        match outcome {
            CommandOutcome::Started(plan) => {
                let heading = plan.heading.map_or_else(|| "none".to_owned(), |h| h.to_string());
                self.note(
                    t,
                    "actor_depart",
                    node.clone(),
                    fire,
                    Some(format!(
                        "to ({}, {}) distance {} heading {heading} eta {}",
                        plan.target.x, plan.target.y, plan.distance, plan.eta
                    )),
                );
                if plan.distance == 0.0 {
                    if let Some(f) = fire {
                        self.metrics.on_response(f, t);
                    }
                    self.note(t, "actor_arrival", node, fire, None);
                    self.q.schedule(t + self.sc.actors.service_time, Event::ExtinguishComplete(aa))?;
                } else {
                    self.q.schedule(plan.eta, Event::ActorArrival(aa))?;
                }
            }
            CommandOutcome::Queued { depth } => {
                self.note(t, "actor_queued", node, fire, Some(format!("depth {depth}")));
            }
        }
        self.send_status(aa, fire, t)
    }

    fn send_status(&mut self, aa: u16, fire: Option<FireId>, t: f64) -> Result<(), EngineError> {
        let payload = self.actors[aa as usize].status_payload(t);
        let (dst, port) = match self.sc.topology.kind {
            TopologyKind::SemiAutomatic => (NodeRef::ClusterHead(aa), ports::CLUSTER_HEAD),
            _ => (NodeRef::Interface, ports::STATUS),
        };
        self.send(NodeRef::Actor(aa), dst, port, Body::Status(payload), fire, t)
    }

    fn on_arrival(&mut self, aa: u16, t: f64) -> Result<(), EngineError> {
        let until = self.actors[aa as usize].on_arrival(t)?;
        let fire = match self.actors[aa as usize].phase() {
            ActorPhase::Extinguishing { fire, .. } => fire,
            _ => None,
        };
        if let Some(f) = fire {
            self.metrics.on_response(f, t);
        }
        self.note(t, "actor_arrival", NodeRef::Actor(aa).to_string(), fire, None);
        self.q.schedule(until, Event::ExtinguishComplete(aa))?;
        self.send_status(aa, fire, t)
    }

    fn on_extinguished(&mut self, aa: u16, t: f64) -> Result<(), EngineError> {
        let node = NodeRef::Actor(aa).to_string();
        let pos = self.actors[aa as usize].current;
        let reach = self.sc.grid.r;
        let spec = self.d.spec;
        let mut contained = Vec::new();
        for (i, f) in self.fires.iter_mut().enumerate() {
            if !self.ignited[i] || f.is_contained() {
                continue;
            }
            if f.event.ignition.distance(&pos) - f.radius(t) <= reach {
                f.contain(t);
                contained.push((f.event.fire_id, burned_area(f, t, &spec)));
            }
        }
        if contained.is_empty() {
            self.note(t, "containment_noop", node.clone(), None, None);
        }
        for (id, area) in contained {
            self.metrics.on_containment(id, t, area);
            self.note(t, "containment", node.clone(), Some(id), Some(format!("burned_area {area}")));
        }
        self.note(t, "extinguish_complete", node, None, None);
        match self.actors[aa as usize].on_extinguish_complete()? {
            Some(next) => {
                let outcome = self.actors[aa as usize].on_command(&next.command, next.fire, t)?;
                self.after_command(aa, outcome, next.fire, t)
            }
            None => self.send_status(aa, None, t),
        }
    }

    fn on_pubsub_tick(&mut self, id: SubId, t: f64) -> Result<(), EngineError> {
        for d in self.broker.due_for(id, t) {
            self.metrics.pubsub_deliveries += 1;
            let dst = NodeRef::Monitor(d.subscriber.clone());
            self.records.push(TraceRecord {
                t,
                kind: "pubsub_delivery",
                src: NodeRef::Broker.to_string(),
                dst: dst.to_string(),
                port: ports::SUBSCRIPTION.into(),
                payload: hex::encode(&d.update.payload),
                fire: None,
                detail: Some(d.update.topic.clone()),
            });
            self.send(NodeRef::Broker, dst, ports::SUBSCRIPTION, Body::Delivery(d), None, t)?;
        }
        if let Some(next) = self.broker.next_instant(id).filter(|&n| n <= self.sc.horizon) {
            self.q.schedule(next, Event::PubsubTick(id))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tick_rounding() {
        assert_eq!(first_tick_at_or_after(0.0, 1.0), 0.0);
        assert_eq!(first_tick_at_or_after(0.25, 1.0), 1.0);
        assert_eq!(first_tick_at_or_after(100.25, 1.0), 101.0);
        assert_eq!(first_tick_at_or_after(3.0, 1.0), 3.0);
        let t = first_tick_at_or_after(0.3, 0.1);
        assert!(t >= 0.3 && t - 0.1 < 0.3);
    }

    #[test]
    fn short_horizon_ends_cleanly() {
        let sc = Scenario::from_toml_str(
            "horizon = 0.5\n[grid]\nn = 4\nr = 50.0\n[[fire_events]]\nx = 10.0\ny = 10.0\nspeed = 1.0\nt0 = 0.1\n",
        )
        .unwrap();
        let out = run(&sc).unwrap();
        assert_eq!(out.trace.of_kind("detection").count(), 0);
        assert!(!out.all_contained);
        assert_eq!(out.metrics.total_sent(), 0);
    }
}
