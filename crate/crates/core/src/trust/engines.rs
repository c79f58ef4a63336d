//! Decision functions for each architecture.

use std::collections::HashSet;

use crate::domain::{AccessRequest, CommunityId, UeId};
use crate::identity::Verification;
use crate::tpss::{CelAssessment, RiskLevel};

use super::{BetaTrust, Multipliers, Reason, TrustDecision, TrustTable};

/// Everything the ZTA-6G control plane knows about one request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZtaInputs {
    pub certificate: Verification,
    /// CEL reports about the guest visible to its home community.
    pub home_view: CelAssessment,
    /// Trust held by the destination about the guest.
    pub trust: BetaTrust,
    /// Combined index of the guest's home community.
    pub home_index: f64,
    pub risk: RiskLevel,
    /// CEL reports visible to the destination.
    pub cel: CelAssessment,
    pub abd: f64,
}

impl ZtaInputs {
    pub fn clean(trust: BetaTrust) -> Self {
        Self {
            certificate: Verification::Valid,
            home_view: CelAssessment::default(),
            trust,
            home_index: 1.0,
            risk: RiskLevel::LowRisk,
            cel: CelAssessment::default(),
            abd: 0.0,
        }
    }
}

pub fn zta_score(inputs: &ZtaInputs, m: &Multipliers) -> f64 {
    inputs.trust.value()
        * inputs.home_index
        * m.risk(inputs.risk)
        * m.contact(inputs.cel.contacted_infected)
        * m.anomaly(inputs.abd)
}

/// The home community refuses to forward a resident it has seen attacking.
pub fn home_self_evaluation(inputs: &ZtaInputs) -> Option<TrustDecision> {
    inputs
        .home_view
        .attacked_victim
        .then(|| TrustDecision::deny(0.0, Reason::SelfEvaluationBlocked))
}

pub fn destination_evaluation(inputs: &ZtaInputs, threshold: f64, m: &Multipliers) -> TrustDecision {
    if inputs.certificate != Verification::Valid {
        return TrustDecision::deny(0.0, Reason::InvalidCertificate);
    }
    let score = zta_score(inputs, m);
    if score >= threshold {
        TrustDecision::permit(score)
    } else {
        TrustDecision::deny(score, Reason::BelowThreshold)
    }
}

pub fn evaluate_zta6g(
    req: &AccessRequest,
    inputs: &ZtaInputs,
    threshold: f64,
    m: &Multipliers,
) -> TrustDecision {
    debug_assert_ne!(req.home_community, req.dst_community);
    home_self_evaluation(inputs).unwrap_or_else(|| destination_evaluation(inputs, threshold, m))
}

pub fn evaluate_tbpf(req: &AccessRequest, table: &TrustTable, threshold: f64) -> TrustDecision {
    let score = table.get(req.dst_community, req.guest).value();
    if score >= threshold {
        TrustDecision::permit(score)
    } else {
        TrustDecision::deny(score, Reason::BelowThreshold)
    }
}

/// Per-destination blacklists; entries are never shared between communities.
#[derive(Debug, Clone, Default)]
pub struct Blacklists {
    entries: HashSet<(CommunityId, UeId)>,
}

impl Blacklists {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, community: CommunityId, source: UeId) -> bool {
        self.entries.insert((community, source))
    }

    pub fn contains(&self, community: CommunityId, source: UeId) -> bool {
        self.entries.contains(&(community, source))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub fn evaluate_tris(req: &AccessRequest, blacklists: &Blacklists) -> TrustDecision {
    if blacklists.contains(req.dst_community, req.guest) {
        TrustDecision::deny(0.0, Reason::Blacklisted)
    } else {
        TrustDecision::permit(1.0)
    }
}

pub fn evaluate_permit_all(_req: &AccessRequest) -> TrustDecision {
    TrustDecision::permit(1.0)
}
