//! Validity-period cache of trust decisions.

use std::collections::HashMap;

use crate::domain::{AccessRequest, CommunityId, Second, UeId};

use super::TrustDecision;

/// Reuses a decision for `(guest, destination)` while
/// `now - evaluated_at < period`.
#[derive(Debug, Clone)]
pub struct DecisionCache {
    period: Second,
    entries: HashMap<(UeId, CommunityId), (TrustDecision, Second)>,
    evaluations: u64,
}

impl DecisionCache {
    /// # Panics
    /// If `period` is zero.
    pub fn new(period: Second) -> Self {
        assert!(period >= 1, "validity period must be at least one second");
        Self {
            period,
            entries: HashMap::new(),
            evaluations: 0,
        }
    }

    pub fn period(&self) -> Second {
        self.period
    }

    /// Number of times an evaluator has been invoked.
    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    pub fn cached_decide<F>(&mut self, req: &AccessRequest, now: Second, evaluator: F) -> TrustDecision
    where
        F: FnOnce(&AccessRequest) -> TrustDecision,
    {
        let key = (req.guest, req.dst_community);
        if let Some(&(decision, at)) = self.entries.get(&key) {
            if now >= at && now - at < self.period {
                return decision;
            }
        }
        self.evaluations += 1;
        let decision = evaluator(req);
        self.entries.insert(key, (decision, now));
        decision
    }
}

pub fn cached_decide<F>(
    cache: &mut DecisionCache,
    req: &AccessRequest,
    now: Second,
    evaluator: F,
) -> TrustDecision
where
    F: FnOnce(&AccessRequest) -> TrustDecision,
{
    cache.cached_decide(req, now, evaluator)
}
