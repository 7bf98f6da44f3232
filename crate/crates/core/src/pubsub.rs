//! Cloud-side publish/subscribe broker.
//!
//! Publishing only overwrites the retained value of a topic. Subscribers get
//! the retained values matching their filter at fixed instants
//! `created_at + k·period`, `k ≥ 1`. Filters use `/`-separated levels with
//! `+` for exactly one level and a trailing `#` for any remainder.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub mod topics {
    use crate::geometry::QuadrantNo;

    pub fn quadrant_fire(scenario: &str, qno: QuadrantNo) -> String {
        format!("wsan/{scenario}/quadrant/{}/fire", qno.0)
    }

    pub fn actor_status(scenario: &str, aa: u16) -> String {
        format!("wsan/{scenario}/actor/{aa}/status")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TopicError {
    #[error("topic filter is empty")]
    Empty,
    #[error("'#' must be the whole last level in {0:?}")]
    MisplacedMultiLevel(String),
    #[error("'+' must occupy a whole level in {0:?}")]
    MisplacedSingleLevel(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct TopicFilter(String);

impl TopicFilter {
    pub fn new(filter: impl Into<String>) -> Result<Self, TopicError> {
        let filter = filter.into();
        if filter.is_empty() {
            return Err(TopicError::Empty);
        }
        let levels: Vec<&str> = filter.split('/').collect();
        for (i, level) in levels.iter().enumerate() {
            if level.contains('#') && (*level != "#" || i + 1 != levels.len()) {
                return Err(TopicError::MisplacedMultiLevel(filter));
            }
            if level.contains('+') && *level != "+" {
                return Err(TopicError::MisplacedSingleLevel(filter));
            }
        }
        Ok(Self(filter))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn matches(&self, topic: &str) -> bool {
        let mut filter = self.0.split('/');
        let mut topic = topic.split('/');
        loop {
            match (filter.next(), topic.next()) {
                (Some("#"), _) => return true,
                (Some("+"), Some(_)) => {}
                (Some(f), Some(t)) if f == t => {}
                (None, None) => return true,
                _ => return false,
            }
        }
    }
}

impl TryFrom<String> for TopicFilter {
    type Error = TopicError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        Self::new(s)
    }
}

impl From<TopicFilter> for String {
    fn from(f: TopicFilter) -> Self {
        f.0
    }
}

impl fmt::Display for TopicFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SubId(pub u64);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Subscription {
    pub sub_id: SubId,
    pub subscriber: String,
    pub topic_filter: TopicFilter,
    pub period: f64,
    pub created_at: f64,
}

impl Subscription {
    /// The k-th delivery instant. Computed from `k` directly so spacing never drifts.
    pub fn instant(&self, k: u64) -> f64 {
        self.created_at + k as f64 * self.period
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Update {
    pub topic: String,
    pub payload: Vec<u8>,
    pub published_at: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Delivery {
    pub sub_id: SubId,
    pub subscriber: String,
    pub update: Update,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ack {
    pub sub_id: SubId,
    pub first_delivery: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Rejection {
    #[error("subscription id {0:?} already exists")]
    DuplicateId(SubId),
    #[error("period must be positive and finite, got {0}")]
    BadPeriod(f64),
}

/// How cloud-gated cluster heads get permission to dispatch.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DispatchPolicy {
    /// Every detection is authorized.
    #[default]
    Default,
    /// Authorized only when some subscription watches the detection topic.
    SubscriptionRequired,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Authorization {
    Granted,
    Denied,
}

#[derive(Debug, Clone)]
struct Entry {
    sub: Subscription,
    next_k: u64,
}

#[derive(Debug, Clone, Default)]
pub struct Broker {
    subscriptions: BTreeMap<SubId, Entry>,
    retained: BTreeMap<String, Update>,
    policy: DispatchPolicy,
}

impl Broker {
    pub fn new(policy: DispatchPolicy) -> Self {
        Self { policy, ..Self::default() }
    }

    pub fn policy(&self) -> DispatchPolicy {
        self.policy
    }

    pub fn subscribe(&mut self, req: Subscription) -> Result<Ack, Rejection> {
        if !(req.period.is_finite() && req.period > 0.0) {
            return Err(Rejection::BadPeriod(req.period));
        }
        if self.subscriptions.contains_key(&req.sub_id) {
            return Err(Rejection::DuplicateId(req.sub_id));
        }
        let ack = Ack { sub_id: req.sub_id, first_delivery: req.instant(1) };
        self.subscriptions.insert(req.sub_id, Entry { sub: req, next_k: 1 });
        Ok(ack)
    }

    pub fn publish(&mut self, u: Update) {
        self.retained.insert(u.topic.clone(), u);
    }

    pub fn retained(&self, topic: &str) -> Option<&Update> {
        self.retained.get(topic)
    }

    pub fn retained_len(&self) -> usize {
        self.retained.len()
    }

    pub fn subscription_count(&self) -> usize {
        self.subscriptions.len()
    }

    /// Next delivery instant still pending for a subscription.
    pub fn next_instant(&self, id: SubId) -> Option<f64> {
        self.subscriptions.get(&id).map(|e| e.sub.instant(e.next_k))
    }

    /// Deliveries owed by one subscription at `t`. Instants that passed
    /// without a call are skipped, never delivered late.
    pub fn due_for(&mut self, id: SubId, t: f64) -> Vec<Delivery> {
        let Some(entry) = self.subscriptions.get_mut(&id) else {
            return Vec::new();
        };
        while entry.sub.instant(entry.next_k) < t {
            entry.next_k += 1;
        }
        if entry.sub.instant(entry.next_k) != t {
            return Vec::new();
        }
        entry.next_k += 1;
        let sub = &entry.sub;
        self.retained
            .values()
            .filter(|u| sub.topic_filter.matches(&u.topic))
            .map(|u| Delivery {
                sub_id: sub.sub_id,
                subscriber: sub.subscriber.clone(),
                update: u.clone(),
            })
            .collect()
    }

    pub fn due_deliveries(&mut self, t: f64) -> Vec<Delivery> {
        let ids: Vec<SubId> = self.subscriptions.keys().copied().collect();
        ids.into_iter().flat_map(|id| self.due_for(id, t)).collect()
    }

    pub fn authorize_dispatch(&self, detection: &Update) -> Authorization {
        match self.policy {
            DispatchPolicy::Default => Authorization::Granted,
            DispatchPolicy::SubscriptionRequired => {
                if self
                    .subscriptions
                    .values()
                    .any(|e| e.sub.topic_filter.matches(&detection.topic))
                {
                    Authorization::Granted
                } else {
                    Authorization::Denied
                }
            }
        }
    }
}
