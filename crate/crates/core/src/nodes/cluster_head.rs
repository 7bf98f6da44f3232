use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::NodeError;
use crate::fire::FireId;
use crate::geometry::{quadrant_of, ClusterHeadSite, Deployment, Point, QuadrantNo};
use crate::protocol::{encode_beacon, BeaconNodePacket, ClusterHeadNodePacket};
use crate::pubsub::{topics, Update};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChMode {
    #[default]
    Direct,
    /// Dispatch waits for the broker's authorization.
    CloudGated,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChAction {
    Dispatch(ClusterHeadNodePacket),
    RequestAuthorization { request: u64, detection: Update },
    /// Already dispatched for this (quadrant, fire) inside the window.
    Suppressed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChOutput {
    /// Published for every accepted beacon, whatever the mode.
    pub monitoring: Update,
    pub qno: QuadrantNo,
    pub action: ChAction,
}

#[derive(Debug, Clone)]
pub struct ClusterHeadState {
    pub chno: u16,
    pub position: Point,
    pub dedup_window: f64,
    pub mode: ChMode,
    scenario: String,
    recent_dispatches: BTreeMap<(QuadrantNo, FireId), f64>,
    pending: BTreeMap<u64, ClusterHeadNodePacket>,
    next_request: u64,
}

impl ClusterHeadState {
    pub fn new(site: &ClusterHeadSite, mode: ChMode, dedup_window: f64, scenario: &str) -> Self {
        Self {
            chno: site.chno,
            position: site.position,
            dedup_window,
            mode,
            scenario: scenario.to_owned(),
            recent_dispatches: BTreeMap::new(),
            pending: BTreeMap::new(),
            next_request: 0,
        }
    }

    fn is_duplicate(&self, key: (QuadrantNo, FireId), t: f64) -> bool {
        self.recent_dispatches
            .get(&key)
            .is_some_and(|&at| t - at < self.dedup_window)
    }

    /// Handles a decoded beacon. `fire` is simulation metadata riding next to
    /// the frame; it never appears on the wire.
    pub fn on_beacon(
        &mut self,
        p: &BeaconNodePacket,
        fire: FireId,
        deployment: &Deployment,
        t: f64,
    ) -> Result<ChOutput, NodeError> {
        let qno = quadrant_of(Point::new(p.xc, p.yc), &deployment.spec)?;
        let aa = deployment.actor_for(qno).ok_or(NodeError::UnknownActor(qno.0))?;
        let topic = topics::quadrant_fire(&self.scenario, qno);
        // the beacon was decoded from a frame, so it re-encodes
        let payload = encode_beacon(p).map(|f| f.into_bytes()).unwrap_or_default();
        let monitoring = Update { topic, payload, published_at: t };

        let key = (qno, fire);
        let action = if self.is_duplicate(key, t) {
            ChAction::Suppressed
        } else {
            self.recent_dispatches.insert(key, t);
            let cmd = ClusterHeadNodePacket { xc: p.xc, yc: p.yc, qno: qno.0, aa };
            match self.mode {
                ChMode::Direct => ChAction::Dispatch(cmd),
                ChMode::CloudGated => {
                    let request = self.next_request;
                    self.next_request += 1;
                    self.pending.insert(request, cmd);
                    ChAction::RequestAuthorization { request, detection: monitoring.clone() }
                }
            }
        };
        Ok(ChOutput { monitoring, qno, action })
    }

    /// Resolves a pending authorization. Returns the command to send when granted.
    pub fn on_authorization(&mut self, request: u64, granted: bool) -> Option<ClusterHeadNodePacket> {
        let cmd = self.pending.remove(&request)?;
        granted.then_some(cmd)
    }

    pub fn pending_authorizations(&self) -> usize {
        self.pending.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{plan_deployment, GridSpec};

    fn setup(mode: ChMode) -> (ClusterHeadState, Deployment) {
        let d = plan_deployment(&GridSpec::new(4, 50.0).unwrap());
        let ch = ClusterHeadState::new(&d.cluster_heads[1], mode, f64::INFINITY, "ref");
        (ch, d)
    }

    #[test]
    fn direct_dispatch_to_quadrant_actor() {
        let (mut ch, d) = setup(ChMode::Direct);
        let out = ch
            .on_beacon(&BeaconNodePacket { xc: 350.0, yc: 120.0, chno: 1 }, FireId(0), &d, 3.0)
            .unwrap();
        assert_eq!(
            out.action,
            ChAction::Dispatch(ClusterHeadNodePacket { xc: 350.0, yc: 120.0, qno: 1, aa: 1 })
        );
        assert_eq!(out.monitoring.topic, "wsan/ref/quadrant/1/fire");
        assert_eq!(out.monitoring.payload.len(), 19);
    }

    #[test]
    fn duplicate_suppressed_but_still_monitored() {
        let (mut ch, d) = setup(ChMode::Direct);
        let b = BeaconNodePacket { xc: 350.0, yc: 50.0, chno: 1 };
        ch.on_beacon(&b, FireId(0), &d, 1.0).unwrap();
        let again = ch.on_beacon(&BeaconNodePacket { xc: 250.0, ..b }, FireId(0), &d, 2.0).unwrap();
        assert_eq!(again.action, ChAction::Suppressed);
        // another fire in the same quadrant is novel
        let other = ch.on_beacon(&b, FireId(1), &d, 2.0).unwrap();
        assert!(matches!(other.action, ChAction::Dispatch(_)));
    }

    #[test]
    fn window_expiry_allows_redispatch() {
        let d = plan_deployment(&GridSpec::new(4, 50.0).unwrap());
        let mut ch = ClusterHeadState::new(&d.cluster_heads[0], ChMode::Direct, 10.0, "ref");
        let b = BeaconNodePacket { xc: 50.0, yc: 50.0, chno: 0 };
        ch.on_beacon(&b, FireId(0), &d, 0.0).unwrap();
        assert_eq!(ch.on_beacon(&b, FireId(0), &d, 9.9).unwrap().action, ChAction::Suppressed);
        assert!(matches!(ch.on_beacon(&b, FireId(0), &d, 10.0).unwrap().action, ChAction::Dispatch(_)));
    }

    #[test]
    fn out_of_area_rejected() {
        let (mut ch, d) = setup(ChMode::Direct);
        let err = ch.on_beacon(&BeaconNodePacket { xc: -5.0, yc: 10.0, chno: 0 }, FireId(0), &d, 0.0);
        assert!(matches!(err, Err(NodeError::OutOfArea(_))));
    }

    #[test]
    fn gated_mode_waits_for_broker() {
        let (mut ch, d) = setup(ChMode::CloudGated);
        let out = ch
            .on_beacon(&BeaconNodePacket { xc: 350.0, yc: 120.0, chno: 1 }, FireId(0), &d, 0.0)
            .unwrap();
        let ChAction::RequestAuthorization { request, detection } = out.action else {
            panic!("expected an authorization request");
        };
        assert_eq!(detection.topic, out.monitoring.topic);
        assert_eq!(ch.pending_authorizations(), 1);
        let cmd = ch.on_authorization(request, true).unwrap();
        assert_eq!((cmd.qno, cmd.aa), (1, 1));
        assert_eq!(ch.on_authorization(request, true), None);

        let out = ch
            .on_beacon(&BeaconNodePacket { xc: 50.0, yc: 350.0, chno: 2 }, FireId(1), &d, 0.0)
            .unwrap();
        let ChAction::RequestAuthorization { request, .. } = out.action else { panic!() };
        assert_eq!(ch.on_authorization(request, false), None);
    }
}
