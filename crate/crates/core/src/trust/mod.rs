//! Access-decision engines and the validity-period cache.

pub mod beta;
pub mod cache;
pub mod engines;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tpss::RiskLevel;

pub use beta::{beta_trust_value, BetaTrust, Evidence, Priors, TrustTable};
pub use cache::{cached_decide, DecisionCache};
pub use engines::{
    destination_evaluation, evaluate_permit_all, evaluate_tbpf, evaluate_tris, evaluate_zta6g,
    home_self_evaluation, zta_score, Blacklists, ZtaInputs,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown architecture {0:?}; expected one of zta6g, tbpf, tris, permit_all")]
pub struct UnknownArchitecture(pub String);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Architecture {
    #[serde(rename = "zta6g")]
    Zta6g,
    #[serde(rename = "tbpf")]
    Tbpf,
    #[serde(rename = "tris")]
    Tris,
    #[serde(rename = "permit_all")]
    PermitAll,
}

impl Architecture {
    pub const ALL: [Architecture; 4] = [Self::Zta6g, Self::Tbpf, Self::Tris, Self::PermitAll];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Zta6g => "zta6g",
            Self::Tbpf => "tbpf",
            Self::Tris => "tris",
            Self::PermitAll => "permit_all",
        }
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Architecture {
    type Err = UnknownArchitecture;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| UnknownArchitecture(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Permit,
    Deny,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Reason {
    Ok,
    SelfEvaluationBlocked,
    BelowThreshold,
    Blacklisted,
    InvalidCertificate,
}

/// `verdict == Deny` exactly when `reason != Ok`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrustDecision {
    pub verdict: Verdict,
    pub score: f64,
    pub reason: Reason,
}

impl TrustDecision {
    pub fn permit(score: f64) -> Self {
        Self { verdict: Verdict::Permit, score, reason: Reason::Ok }
    }

    pub fn deny(score: f64, reason: Reason) -> Self {
        debug_assert!(reason != Reason::Ok);
        Self { verdict: Verdict::Deny, score, reason }
    }

    pub fn is_permit(&self) -> bool {
        self.verdict == Verdict::Permit
    }
}

/// Penalty factors applied by the destination evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Multipliers {
    pub high_risk: f64,
    pub medium_risk: f64,
    pub low_risk: f64,
    pub contacted_infected: f64,
    pub anomaly_weight: f64,
}

impl Default for Multipliers {
    fn default() -> Self {
        Self {
            high_risk: 0.8,
            medium_risk: 0.95,
            low_risk: 1.0,
            contacted_infected: 0.9,
            anomaly_weight: 0.5,
        }
    }
}

impl Multipliers {
    pub fn risk(&self, level: RiskLevel) -> f64 {
        match level {
            RiskLevel::LowRisk => self.low_risk,
            RiskLevel::MediumRisk => self.medium_risk,
            RiskLevel::HighRisk => self.high_risk,
        }
    }

    pub fn contact(&self, contacted: bool) -> f64 {
        if contacted {
            self.contacted_infected
        } else {
            1.0
        }
    }

    pub fn anomaly(&self, abd: f64) -> f64 {
        1.0 - self.anomaly_weight * abd
    }

    /// Every factor must lie in `(0, 1]` and the anomaly weight in `[0, 1]`.
    pub fn is_valid(&self) -> bool {
        let unit = |x: f64| x > 0.0 && x <= 1.0;
        unit(self.high_risk)
            && unit(self.medium_risk)
            && unit(self.low_risk)
            && unit(self.contacted_infected)
            && (0.0..=1.0).contains(&self.anomaly_weight)
    }
}
