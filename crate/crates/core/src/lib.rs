//! Simulator of a community-based zero-trust architecture for 6G networks.
//!
//! Communities of UEs exchange traffic across a small topology while a
//! worm spreads inside each community and recruits bots for a zero-day
//! DDoS. Each destination community filters cross-domain requests with one
//! of several access-control architectures, and the engine records how
//! many attack packets each one stops.

pub mod domain;
pub mod engine;
pub mod epidemic;
pub mod identity;
pub mod tpss;
pub mod trust;

pub use domain::{
    format_ue_id, parse_ue_id, shortest_path, AccessRequest, Community, CommunityId, DomainError,
    Packet, PacketKind, Second, Topology, UeId,
};
pub use epidemic::{EpidemicError, EpidemicState, SirCounts};
pub use identity::{Certificate, IdentityError, IdentityRegistry, SignerKind, Verification};
pub use tpss::{Ledger, TpssError};
pub use trust::{Architecture, BetaTrust, DecisionCache, Reason, TrustDecision, Verdict};
