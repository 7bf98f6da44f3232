use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::NodeError;
use crate::fire::FireId;
use crate::geometry::{quadrant_of, Deployment, Point, QuadrantNo};
use crate::protocol::{BeaconNodePacket, ClusterHeadNodePacket};

/// Where detections are turned into actor commands in automatic topologies.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProcessingSite {
    #[default]
    Interface,
    Actor,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataFilter {
    #[default]
    AcceptAll,
    RejectAll,
    /// Accept only data sensed in the listed quadrants.
    Quadrants(Vec<u16>),
}

impl DataFilter {
    pub fn accepts(&self, qno: QuadrantNo) -> bool {
        match self {
            DataFilter::AcceptAll => true,
            DataFilter::RejectAll => false,
            DataFilter::Quadrants(qs) => qs.contains(&qno.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StoredRecord {
    pub t: f64,
    pub packet: BeaconNodePacket,
    pub fire: FireId,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Forward {
    /// Interface-side processing: a ready command.
    Command(ClusterHeadNodePacket),
    /// Actor-side processing: the raw beacon, routed to the quadrant's actor.
    Raw { actor: u16, packet: BeaconNodePacket },
}

impl Forward {
    pub fn actor(&self) -> u16 {
        match self {
            Forward::Command(c) => c.aa,
            Forward::Raw { actor, .. } => *actor,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InterfaceOutcome {
    Rejected,
    Stored { qno: QuadrantNo, forward: Option<Forward> },
}

/// Cloud-resident gateway that filters, stores and forwards sensed data.
#[derive(Debug, Clone)]
pub struct IntegrationInterfaceState {
    pub filter: DataFilter,
    pub site: ProcessingSite,
    pub dedup_window: f64,
    store: Vec<StoredRecord>,
    received: u64,
    rejected: u64,
    forwarded: u64,
    recent: BTreeMap<(QuadrantNo, FireId), f64>,
}

impl IntegrationInterfaceState {
    pub fn new(filter: DataFilter, site: ProcessingSite, dedup_window: f64) -> Self {
        Self {
            filter,
            site,
            dedup_window,
            store: Vec::new(),
            received: 0,
            rejected: 0,
            forwarded: 0,
            recent: BTreeMap::new(),
        }
    }

    pub fn store(&self) -> &[StoredRecord] {
        &self.store
    }

    pub fn received(&self) -> u64 {
        self.received
    }

    pub fn rejected(&self) -> u64 {
        self.rejected
    }

    pub fn forwarded(&self) -> u64 {
        self.forwarded
    }

    pub fn on_data(
        &mut self,
        data: &BeaconNodePacket,
        fire: FireId,
        deployment: &Deployment,
        t: f64,
    ) -> Result<InterfaceOutcome, NodeError> {
        self.received += 1;
        let qno = quadrant_of(Point::new(data.xc, data.yc), &deployment.spec)?;
        if !self.filter.accepts(qno) {
            self.rejected += 1;
            return Ok(InterfaceOutcome::Rejected);
        }
        self.store.push(StoredRecord { t, packet: *data, fire });

        let key = (qno, fire);
        if self.recent.get(&key).is_some_and(|&at| t - at < self.dedup_window) {
            return Ok(InterfaceOutcome::Stored { qno, forward: None });
        }
        let aa = deployment.actor_for(qno).ok_or(NodeError::UnknownActor(qno.0))?;
        self.recent.insert(key, t);
        self.forwarded += 1;
        let forward = match self.site {
            ProcessingSite::Interface => {
                Forward::Command(ClusterHeadNodePacket { xc: data.xc, yc: data.yc, qno: qno.0, aa })
            }
            ProcessingSite::Actor => Forward::Raw { actor: aa, packet: *data },
        };
        Ok(InterfaceOutcome::Stored { qno, forward: Some(forward) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{plan_deployment, GridSpec};
    use crate::nodes::{ChAction, ChMode, ClusterHeadState};

    fn deployment() -> Deployment {
        plan_deployment(&GridSpec::new(4, 50.0).unwrap())
    }

    #[test]
    fn accept_all_matches_cluster_head_output() {
        let d = deployment();
        let mut iface = IntegrationInterfaceState::new(DataFilter::AcceptAll, ProcessingSite::Interface, f64::INFINITY);
        let mut ch = ClusterHeadState::new(&d.cluster_heads[1], ChMode::Direct, f64::INFINITY, "s");
        let beacons = [
            (BeaconNodePacket { xc: 350.0, yc: 150.0, chno: 1 }, FireId(0)),
            (BeaconNodePacket { xc: 250.0, yc: 150.0, chno: 1 }, FireId(0)),
            (BeaconNodePacket { xc: 350.0, yc: 50.0, chno: 1 }, FireId(1)),
        ];
        for (t, (b, f)) in beacons.iter().enumerate() {
            let from_iface = match iface.on_data(b, *f, &d, t as f64).unwrap() {
                InterfaceOutcome::Stored { forward: Some(Forward::Command(c)), .. } => Some(c),
                InterfaceOutcome::Stored { forward: None, .. } => None,
                other => panic!("{other:?}"),
            };
            let from_ch = match ch.on_beacon(b, *f, &d, t as f64).unwrap().action {
                ChAction::Dispatch(c) => Some(c),
                _ => None,
            };
            assert_eq!(from_iface, from_ch);
        }
        assert_eq!(iface.store().len(), 3);
        assert_eq!(iface.forwarded(), 2);
    }

    #[test]
    fn reject_all_stores_nothing() {
        let d = deployment();
        let mut iface = IntegrationInterfaceState::new(DataFilter::RejectAll, ProcessingSite::Interface, f64::INFINITY);
        let out = iface.on_data(&BeaconNodePacket { xc: 50.0, yc: 50.0, chno: 0 }, FireId(0), &d, 0.0).unwrap();
        assert_eq!(out, InterfaceOutcome::Rejected);
        assert!(iface.store().is_empty());
        assert_eq!((iface.received(), iface.rejected(), iface.forwarded()), (1, 1, 0));
    }

    #[test]
    fn quadrant_filter() {
        let d = deployment();
        let mut iface =
            IntegrationInterfaceState::new(DataFilter::Quadrants(vec![3]), ProcessingSite::Actor, f64::INFINITY);
        assert_eq!(
            iface.on_data(&BeaconNodePacket { xc: 50.0, yc: 50.0, chno: 0 }, FireId(0), &d, 0.0).unwrap(),
            InterfaceOutcome::Rejected
        );
        let out = iface.on_data(&BeaconNodePacket { xc: 350.0, yc: 350.0, chno: 3 }, FireId(0), &d, 0.0).unwrap();
        let InterfaceOutcome::Stored { forward: Some(Forward::Raw { actor, .. }), .. } = out else { panic!() };
        assert_eq!(actor, 3);
    }
}
