//! Wiring for the three WSAN–cloud integration shapes.
//!
//! * Semi-automatic: sensors report to their quadrant's cluster head, which
//!   commands the quadrant actor and talks to the broker. Sensors map to cloud
//!   providers, actors to cloud users, cluster heads act as sinks.
//! * Automatic, in the cloud: sensors report to a cloud-resident integration
//!   interface that commands the actors. No cluster heads.
//! * Automatic, with the cloud: the interface sits on the WSAN side and
//!   bridges to the cloud; optionally the cloud commands actors directly.
//!
//! External monitors only ever talk to the broker.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::geometry::Deployment;
use crate::nodes::ProcessingSite;

pub mod ports {
    pub const BEACON: &str = "beaconodepacket";
    pub const CLUSTER_HEAD: &str = "clusterheadnodepacket";
    pub const ACTOR_COMMAND: &str = "actorcommand";
    pub const RAW_DATA: &str = "rawdata";
    pub const STATUS: &str = "status";
    pub const PUBLISH: &str = "publish";
    pub const AUTHORIZE: &str = "authorize";
    pub const SUBSCRIBE: &str = "subscribe";
    pub const SUBSCRIPTION: &str = "subscription";
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopologyKind {
    SemiAutomatic,
    AutomaticInCloud,
    AutomaticWithCloud,
}

impl TopologyKind {
    pub fn is_automatic(&self) -> bool {
        !matches!(self, TopologyKind::SemiAutomatic)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeRef {
    Sensor(u32),
    ClusterHead(u16),
    Actor(u16),
    Interface,
    Broker,
    Monitor(String),
}

impl fmt::Display for NodeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeRef::Sensor(id) => write!(f, "sensor:{id}"),
            NodeRef::ClusterHead(c) => write!(f, "ch:{c}"),
            NodeRef::Actor(a) => write!(f, "actor:{a}"),
            NodeRef::Interface => f.write_str("interface"),
            NodeRef::Broker => f.write_str("broker"),
            NodeRef::Monitor(m) => write!(f, "monitor:{m}"),
        }
    }
}

impl Serialize for NodeRef {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LatencyClass {
    WsanLocal,
    WsanCloud,
}

impl LatencyClass {
    pub const ALL: [LatencyClass; 2] = [LatencyClass::WsanLocal, LatencyClass::WsanCloud];

    pub fn name(&self) -> &'static str {
        match self {
            LatencyClass::WsanLocal => "wsan_local",
            LatencyClass::WsanCloud => "wsan_cloud",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PortDir {
    In,
    Out,
    InOut,
}

impl PortDir {
    fn can_send(self) -> bool {
        matches!(self, PortDir::Out | PortDir::InOut)
    }

    fn can_receive(self) -> bool {
        matches!(self, PortDir::In | PortDir::InOut)
    }
}

/// A directed link joining two same-named ports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Link {
    pub src: NodeRef,
    pub dst: NodeRef,
    pub port: &'static str,
    pub src_dir: PortDir,
    pub dst_dir: PortDir,
    pub class: LatencyClass,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "role")]
pub enum CloudRole {
    Provider { endpoint: u32 },
    User { endpoint: u16 },
    SinkController,
    Monitor,
    None,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WiringError {
    #[error("deployment has no {0}")]
    Missing(&'static str),
    #[error("no link {src} -> {dst} on port {port}")]
    UnknownLink { src: String, dst: String, port: String },
    #[error("port {port} on {node} used with conflicting directions")]
    PortConflict { node: String, port: String },
    #[error("link {src} -> {dst} on port {port} joins incompatible directions")]
    Incompatible { src: String, dst: String, port: String },
    #[error("{0}")]
    RoleMap(String),
    #[error("direct cloud-to-actor commands require interface-side processing")]
    VariationNeedsInterface,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopologyConfig {
    pub kind: TopologyKind,
    pub direct_actor_variation: bool,
    pub processing_site: ProcessingSite,
    pub monitors: Vec<String>,
}

impl TopologyConfig {
    pub fn new(kind: TopologyKind) -> Self {
        Self {
            kind,
            direct_actor_variation: false,
            processing_site: ProcessingSite::Interface,
            monitors: vec!["external".to_owned()],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Wiring {
    pub config: TopologyConfig,
    links: Vec<Link>,
    role_map: BTreeMap<NodeRef, CloudRole>,
    index: BTreeMap<(NodeRef, NodeRef, String), usize>,
}

#[derive(Serialize)]
struct WiringRecord<'a> {
    kind: TopologyKind,
    direct_actor_variation: bool,
    processing_site: ProcessingSite,
    links: &'a [Link],
    roles: Vec<(String, CloudRole)>,
}

impl Serialize for Wiring {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        WiringRecord {
            kind: self.config.kind,
            direct_actor_variation: self.config.direct_actor_variation,
            processing_site: self.config.processing_site,
            links: &self.links,
            roles: self.role_map.iter().map(|(n, r)| (n.to_string(), *r)).collect(),
        }
        .serialize(s)
    }
}

impl Wiring {
    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn role_map(&self) -> &BTreeMap<NodeRef, CloudRole> {
        &self.role_map
    }

    pub fn role(&self, node: &NodeRef) -> CloudRole {
        self.role_map.get(node).copied().unwrap_or(CloudRole::None)
    }

    pub fn link(&self, src: &NodeRef, dst: &NodeRef, port: &str) -> Result<&Link, WiringError> {
        self.index
            .get(&(src.clone(), dst.clone(), port.to_owned()))
            .map(|&i| &self.links[i])
            .ok_or_else(|| WiringError::UnknownLink {
                src: src.to_string(),
                dst: dst.to_string(),
                port: port.to_owned(),
            })
    }

    pub fn count_links(&self, pred: impl Fn(&Link) -> bool) -> usize {
        self.links.iter().filter(|l| pred(l)).count()
    }

    /// Checks that each link joins a sender-capable port to a
    /// receiver-capable one and that every node uses each port name with a
    /// single direction.
    pub fn check_ports(&self) -> Result<(), WiringError> {
        let mut seen: BTreeMap<(&NodeRef, &str), PortDir> = BTreeMap::new();
        for l in &self.links {
            if !l.src_dir.can_send() || !l.dst_dir.can_receive() {
                return Err(WiringError::Incompatible {
                    src: l.src.to_string(),
                    dst: l.dst.to_string(),
                    port: l.port.to_owned(),
                });
            }
            for (node, dir) in [(&l.src, l.src_dir), (&l.dst, l.dst_dir)] {
                if let Some(prev) = seen.insert((node, l.port), dir) {
                    if prev != dir {
                        return Err(WiringError::PortConflict {
                            node: node.to_string(),
                            port: l.port.to_owned(),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// In semi-automatic wiring, sensors must map one-to-one onto provider
    /// endpoints and actors onto user endpoints.
    pub fn check_role_bijections(&self, d: &Deployment) -> Result<(), WiringError> {
        let mut providers = BTreeMap::new();
        let mut users = BTreeMap::new();
        for (node, role) in &self.role_map {
            match (node, role) {
                (NodeRef::Sensor(id), CloudRole::Provider { endpoint }) => {
                    if providers.insert(*endpoint, *id).is_some() {
                        return Err(WiringError::RoleMap(format!("provider endpoint {endpoint} shared")));
                    }
                }
                (NodeRef::Actor(aa), CloudRole::User { endpoint }) => {
                    if users.insert(*endpoint, *aa).is_some() {
                        return Err(WiringError::RoleMap(format!("user endpoint {endpoint} shared")));
                    }
                }
                (_, CloudRole::Provider { .. }) | (_, CloudRole::User { .. }) => {
                    return Err(WiringError::RoleMap(format!("{node} holds a provider/user role")));
                }
                (NodeRef::Sensor(_), _) | (NodeRef::Actor(_), _) => {
                    return Err(WiringError::RoleMap(format!("{node} has no provider/user role")));
                }
                _ => {}
            }
        }
        let sensors_covered = d.sensors.len() == providers.len()
            && d.sensors.iter().all(|s| providers.values().any(|&id| id == s.id));
        let actors_covered = d.actors.len() == users.len()
            && d.actors.iter().all(|a| users.values().any(|&aa| aa == a.aa));
        if !sensors_covered {
            return Err(WiringError::RoleMap("sensors are not a bijection onto providers".into()));
        }
        if !actors_covered {
            return Err(WiringError::RoleMap("actors are not a bijection onto users".into()));
        }
        Ok(())
    }
}

struct Builder {
    links: Vec<Link>,
}

impl Builder {
    fn add(&mut self, src: NodeRef, dst: NodeRef, port: &'static str, dirs: (PortDir, PortDir), class: LatencyClass) {
        self.links.push(Link { src, dst, port, src_dir: dirs.0, dst_dir: dirs.1, class });
    }
}

pub fn build_topology(cfg: &TopologyConfig, d: &Deployment) -> Result<Wiring, WiringError> {
    use LatencyClass::{WsanCloud, WsanLocal};
    use PortDir::{In, InOut, Out};

    if d.sensors.is_empty() {
        return Err(WiringError::Missing("sensors"));
    }
    if d.actors.is_empty() {
        return Err(WiringError::Missing("actors"));
    }
    if cfg.kind == TopologyKind::SemiAutomatic && d.cluster_heads.is_empty() {
        return Err(WiringError::Missing("cluster heads"));
    }
    if cfg.direct_actor_variation && cfg.processing_site != ProcessingSite::Interface {
        return Err(WiringError::VariationNeedsInterface);
    }

    let mut b = Builder { links: Vec::new() };
    let mut roles = BTreeMap::new();

    match cfg.kind {
        TopologyKind::SemiAutomatic => {
            for s in &d.sensors {
                b.add(NodeRef::Sensor(s.id), NodeRef::ClusterHead(s.chno), ports::BEACON, (Out, In), WsanLocal);
            }
            for ch in &d.cluster_heads {
                let chn = NodeRef::ClusterHead(ch.chno);
                let actor = d.actor(ch.chno).ok_or(WiringError::Missing("actor for a cluster head"))?;
                let an = NodeRef::Actor(actor.aa);
                b.add(chn.clone(), an.clone(), ports::CLUSTER_HEAD, (InOut, InOut), WsanLocal);
                b.add(an, chn.clone(), ports::CLUSTER_HEAD, (InOut, InOut), WsanLocal);
                b.add(chn.clone(), NodeRef::Broker, ports::PUBLISH, (Out, In), WsanCloud);
                b.add(NodeRef::Broker, chn.clone(), ports::AUTHORIZE, (Out, In), WsanCloud);
                roles.insert(chn, CloudRole::SinkController);
            }
            for (i, s) in d.sensors.iter().enumerate() {
                roles.insert(NodeRef::Sensor(s.id), CloudRole::Provider { endpoint: i as u32 });
            }
            for (i, a) in d.actors.iter().enumerate() {
                roles.insert(NodeRef::Actor(a.aa), CloudRole::User { endpoint: i as u16 });
            }
        }
        TopologyKind::AutomaticInCloud | TopologyKind::AutomaticWithCloud => {
            let hop = if cfg.kind == TopologyKind::AutomaticInCloud { WsanCloud } else { WsanLocal };
            for s in &d.sensors {
                b.add(NodeRef::Sensor(s.id), NodeRef::Interface, ports::BEACON, (Out, In), hop);
                roles.insert(NodeRef::Sensor(s.id), CloudRole::None);
            }
            let down = match cfg.processing_site {
                ProcessingSite::Interface => ports::ACTOR_COMMAND,
                ProcessingSite::Actor => ports::RAW_DATA,
            };
            for a in &d.actors {
                let an = NodeRef::Actor(a.aa);
                b.add(NodeRef::Interface, an.clone(), down, (Out, In), hop);
                b.add(an.clone(), NodeRef::Interface, ports::STATUS, (Out, In), hop);
                roles.insert(an, CloudRole::None);
            }
            if cfg.kind == TopologyKind::AutomaticWithCloud {
                b.add(NodeRef::Interface, NodeRef::Broker, ports::PUBLISH, (Out, In), WsanCloud);
                if cfg.direct_actor_variation {
                    for a in &d.actors {
                        b.add(NodeRef::Broker, NodeRef::Actor(a.aa), ports::ACTOR_COMMAND, (Out, In), WsanCloud);
                    }
                }
            }
            roles.insert(NodeRef::Interface, CloudRole::None);
        }
    }

    for m in &cfg.monitors {
        let mn = NodeRef::Monitor(m.clone());
        b.add(mn.clone(), NodeRef::Broker, ports::SUBSCRIBE, (Out, In), WsanCloud);
        b.add(NodeRef::Broker, mn.clone(), ports::SUBSCRIPTION, (Out, In), WsanCloud);
        roles.insert(mn, CloudRole::Monitor);
    }
    roles.insert(NodeRef::Broker, CloudRole::None);

    let index = b
        .links
        .iter()
        .enumerate()
        .map(|(i, l)| ((l.src.clone(), l.dst.clone(), l.port.to_owned()), i))
        .collect();
    let wiring = Wiring { config: cfg.clone(), links: b.links, role_map: roles, index };
    wiring.check_ports()?;
    Ok(wiring)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{plan_deployment, GridSpec};

    fn dep(n: u32) -> Deployment {
        plan_deployment(&GridSpec::new(n, 50.0).unwrap())
    }

    fn is_ch(n: &NodeRef) -> bool {
        matches!(n, NodeRef::ClusterHead(_))
    }

    #[test]
    fn semi_automatic_counts() {
        let d = dep(2);
        let w = build_topology(&TopologyConfig::new(TopologyKind::SemiAutomatic), &d).unwrap();
        let providers = w.role_map().values().filter(|r| matches!(r, CloudRole::Provider { .. })).count();
        let users = w.role_map().values().filter(|r| matches!(r, CloudRole::User { .. })).count();
        assert_eq!((providers, users), (4, 4));
        assert_eq!(
            w.count_links(|l| matches!(l.src, NodeRef::Sensor(_)) && is_ch(&l.dst) && l.port == ports::BEACON),
            4
        );
        assert_eq!(w.count_links(|l| is_ch(&l.src) && matches!(l.dst, NodeRef::Actor(_))), 4);
        w.check_role_bijections(&d).unwrap();
        assert_eq!(w.role(&NodeRef::ClusterHead(0)), CloudRole::SinkController);
        assert_eq!(w.role(&NodeRef::Monitor("external".into())), CloudRole::Monitor);
    }

    #[test]
    fn monitors_only_touch_the_broker() {
        let d = dep(4);
        for kind in [TopologyKind::SemiAutomatic, TopologyKind::AutomaticInCloud, TopologyKind::AutomaticWithCloud] {
            let w = build_topology(&TopologyConfig::new(kind), &d).unwrap();
            for l in w.links() {
                if matches!(l.src, NodeRef::Monitor(_)) {
                    assert_eq!(l.dst, NodeRef::Broker);
                }
                if matches!(l.dst, NodeRef::Monitor(_)) {
                    assert_eq!(l.src, NodeRef::Broker);
                }
            }
        }
    }

    #[test]
    fn in_cloud_has_no_cluster_heads() {
        for n in [2, 4, 8] {
            let w = build_topology(&TopologyConfig::new(TopologyKind::AutomaticInCloud), &dep(n)).unwrap();
            assert_eq!(w.count_links(|l| is_ch(&l.src) || is_ch(&l.dst)), 0);
            assert_eq!(w.count_links(|l| l.port == ports::CLUSTER_HEAD), 0);
            assert!(w.check_role_bijections(&dep(n)).is_err());
        }
    }

    #[test]
    fn direct_actor_variation_adds_one_link_per_actor() {
        let d = dep(4);
        let mut cfg = TopologyConfig::new(TopologyKind::AutomaticWithCloud);
        let plain = build_topology(&cfg, &d).unwrap();
        cfg.direct_actor_variation = true;
        let varied = build_topology(&cfg, &d).unwrap();
        assert_eq!(varied.links().len() - plain.links().len(), d.actors.len());
        let cloud_to_actor =
            |w: &Wiring| w.count_links(|l| l.src == NodeRef::Broker && matches!(l.dst, NodeRef::Actor(_)));
        assert_eq!(cloud_to_actor(&plain), 0);
        assert_eq!(cloud_to_actor(&varied), 4);
        cfg.processing_site = ProcessingSite::Actor;
        assert_eq!(build_topology(&cfg, &d), Err(WiringError::VariationNeedsInterface));
    }

    #[test]
    fn link_lookup() {
        let w = build_topology(&TopologyConfig::new(TopologyKind::SemiAutomatic), &dep(2)).unwrap();
        let l = w.link(&NodeRef::Sensor(3), &NodeRef::ClusterHead(3), ports::BEACON).unwrap();
        assert_eq!(l.class, LatencyClass::WsanLocal);
        assert!(matches!(
            w.link(&NodeRef::Sensor(3), &NodeRef::ClusterHead(0), ports::BEACON),
            Err(WiringError::UnknownLink { .. })
        ));
    }

    #[test]
    fn empty_deployment_rejected() {
        let mut d = dep(2);
        d.actors.clear();
        assert_eq!(
            build_topology(&TopologyConfig::new(TopologyKind::SemiAutomatic), &d),
            Err(WiringError::Missing("actors"))
        );
    }

    #[test]
    fn all_kinds_have_consistent_ports() {
        let d = dep(4);
        for kind in [TopologyKind::SemiAutomatic, TopologyKind::AutomaticInCloud, TopologyKind::AutomaticWithCloud] {
            for site in [ProcessingSite::Interface, ProcessingSite::Actor] {
                let mut cfg = TopologyConfig::new(kind);
                cfg.processing_site = site;
                build_topology(&cfg, &d).unwrap().check_ports().unwrap();
            }
        }
    }
}
