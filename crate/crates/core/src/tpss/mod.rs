//! Third-party security services: the cybersecurity event ledger (CEL),
//! the vulnerability database (VDB), the anomalous behaviour detector (ABD)
//! and the community trust indices built from them.

pub mod abd;
pub mod indices;
pub mod ledger;
pub mod vdb;

use thiserror::Error;

use crate::domain::Second;

pub use abd::{abd_score, AbdParams, AccessHistory, Baseline};
pub use indices::{community_indices, CommunityTrustIndex, IndexWeights};
pub use ledger::{CelAssessment, EventKind, Ledger, LedgerEntry, LedgerEvent, GENESIS_HASH};
pub use vdb::{vdb_assess, RiskLevel, Severity, Vdb, VulnRecord};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TpssError {
    #[error("ledger time regression: tail at {last}, event at {got}")]
    TimeRegression { last: Second, got: Second },
    #[error("ledger import failed: {0}")]
    Import(String),
}
