//! Vulnerability database: per-UE vulnerability records and their risk
//! classification.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::domain::{Second, UeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Severity {
    Low,
    High,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RiskLevel {
    LowRisk,
    MediumRisk,
    HighRisk,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VulnRecord {
    pub ue: UeId,
    pub severity: Severity,
    pub disclosed_at: Second,
    pub fixed_at: Option<Second>,
}

impl VulnRecord {
    /// Disclosed by `now` and not yet fixed at `now`.
    pub fn is_open_at(&self, now: Second) -> bool {
        self.disclosed_at <= now && self.fixed_at.is_none_or(|f| f > now)
    }
}

/// Classifies `guest` from the records that concern it.
pub fn vdb_assess(records: &[VulnRecord], guest: UeId, now: Second) -> RiskLevel {
    records
        .iter()
        .filter(|r| r.ue == guest && r.is_open_at(now))
        .map(|r| match r.severity {
            Severity::High => RiskLevel::HighRisk,
            Severity::Low => RiskLevel::MediumRisk,
        })
        .max()
        .unwrap_or(RiskLevel::LowRisk)
}

/// Record store indexed by UE.
#[derive(Debug, Clone, Default)]
pub struct Vdb {
    records: HashMap<UeId, Vec<VulnRecord>>,
}

impl Vdb {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn disclose(&mut self, ue: UeId, severity: Severity, at: Second) {
        self.records.entry(ue).or_default().push(VulnRecord {
            ue,
            severity,
            disclosed_at: at,
            fixed_at: None,
        });
    }

    /// Closes every open record of `ue`. Returns how many were closed.
    pub fn fix(&mut self, ue: UeId, at: Second) -> usize {
        let mut closed = 0;
        if let Some(recs) = self.records.get_mut(&ue) {
            for r in recs.iter_mut().filter(|r| r.fixed_at.is_none()) {
                r.fixed_at = Some(at.max(r.disclosed_at));
                closed += 1;
            }
        }
        closed
    }

    pub fn records_for(&self, ue: &UeId) -> &[VulnRecord] {
        self.records.get(ue).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn assess(&self, guest: UeId, now: Second) -> RiskLevel {
        vdb_assess(self.records_for(&guest), guest, now)
    }

    pub fn has_open(&self, ue: &UeId, now: Second) -> bool {
        self.records_for(ue).iter().any(|r| r.is_open_at(now))
    }

    pub fn all_records(&self) -> impl Iterator<Item = &VulnRecord> {
        self.records.values().flatten()
    }
}
