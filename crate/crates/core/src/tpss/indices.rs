//! Community-level trust indices derived from the three security services.

use serde::{Deserialize, Serialize};

use super::abd::{abd_score, AbdParams, AccessHistory};
use super::ledger::Ledger;
use super::vdb::Vdb;
use crate::domain::{Second, UeId};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndexWeights {
    pub vulnerability: f64,
    pub threat: f64,
    pub anomaly: f64,
}

impl Default for IndexWeights {
    fn default() -> Self {
        Self {
            vulnerability: 1.0,
            threat: 1.0,
            anomaly: 1.0,
        }
    }
}

impl IndexWeights {
    pub fn is_valid(&self) -> bool {
        let w = [self.vulnerability, self.threat, self.anomaly];
        w.iter().all(|x| x.is_finite() && *x >= 0.0) && w.iter().sum::<f64>() > 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommunityTrustIndex {
    pub vuln_risk_index: f64,
    pub threat_index: f64,
    pub anomaly_index: f64,
    pub combined: f64,
}

impl CommunityTrustIndex {
    pub fn from_parts(vuln: f64, threat: f64, anomaly: f64, weights: &IndexWeights) -> Self {
        let total = weights.vulnerability + weights.threat + weights.anomaly;
        let mean = (weights.vulnerability * vuln + weights.threat * threat + weights.anomaly * anomaly)
            / total;
        Self {
            vuln_risk_index: vuln,
            threat_index: threat,
            anomaly_index: anomaly,
            combined: (1.0 - mean).clamp(0.0, 1.0),
        }
    }

    /// Index of a community with no recorded problems.
    pub fn clean() -> Self {
        Self {
            vuln_risk_index: 0.0,
            threat_index: 0.0,
            anomaly_index: 0.0,
            combined: 1.0,
        }
    }
}

/// Computes a community's indices at `now`.
///
/// * vulnerability: share of residents with an open vulnerability record;
/// * threat: share of residents named in an attack report within `window`;
/// * anomaly: mean detector score over residents that logged traffic within
///   `window` (zero when none did).
///
/// `residents[k]`'s access log is `histories[k]`.
#[allow(clippy::too_many_arguments)]
pub fn community_indices(
    ledger: &Ledger,
    vdb: &Vdb,
    residents: &[UeId],
    histories: &[AccessHistory],
    now: Second,
    window: Second,
    weights: &IndexWeights,
    abd: &AbdParams,
) -> CommunityTrustIndex {
    assert_eq!(residents.len(), histories.len(), "one access log per resident");
    if residents.is_empty() {
        return CommunityTrustIndex::clean();
    }
    let n = residents.len() as f64;
    let from = now.saturating_sub(window);
    let mut vulnerable = 0usize;
    let mut reported = 0usize;
    let mut active = 0usize;
    let mut anomaly_sum = 0.0;
    for (ue, history) in residents.iter().zip(histories) {
        if vdb.has_open(ue, now) {
            vulnerable += 1;
        }
        if ledger.cel_assess(*ue, now, window).attacked_victim {
            reported += 1;
        }
        if history.last_active().is_some_and(|t| t >= from && t <= now) {
            active += 1;
            anomaly_sum += abd_score(history, now, abd);
        }
    }
    let anomaly = if active == 0 {
        0.0
    } else {
        anomaly_sum / active as f64
    };
    CommunityTrustIndex::from_parts(vulnerable as f64 / n, reported as f64 / n, anomaly, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tpss::ledger::{EventKind, LedgerEvent};
    use crate::tpss::vdb::Severity;

    fn residents(n: u64) -> Vec<UeId> {
        (1..=n).map(|k| UeId::new(64512, 1, k)).collect()
    }

    #[test]
    fn clean_community_scores_one() {
        let r = residents(1000);
        let h = vec![AccessHistory::new(100); 1000];
        let idx = community_indices(
            &Ledger::new(),
            &Vdb::new(),
            &r,
            &h,
            120,
            30,
            &IndexWeights::default(),
            &AbdParams::default(),
        );
        assert_eq!(idx, CommunityTrustIndex::clean());
    }

    #[test]
    fn threat_index_counts_reported_residents() {
        let r = residents(1000);
        let h = vec![AccessHistory::new(100); 1000];
        let mut ledger = Ledger::new();
        for ue in &r[..100] {
            ledger.append(LedgerEvent::new(110, EventKind::AttackReport, *ue)).unwrap();
            // A second report about the same UE does not double count.
            ledger.append(LedgerEvent::new(110, EventKind::AttackReport, *ue)).unwrap();
        }
        // Outside the window.
        ledger.append(LedgerEvent::new(200, EventKind::AttackReport, r[500])).unwrap();
        let idx = community_indices(
            &ledger,
            &Vdb::new(),
            &r,
            &h,
            120,
            30,
            &IndexWeights::default(),
            &AbdParams::default(),
        );
        assert!((idx.threat_index - 0.1).abs() < 1e-12);
        assert!((idx.combined - (1.0 - 0.1 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn combined_is_one_minus_weighted_mean() {
        let w = IndexWeights::default();
        let idx = CommunityTrustIndex::from_parts(0.1, 0.0, 0.0, &w);
        assert!((idx.combined - 0.966_666_666_666_666_7).abs() < 1e-12);
        let w = IndexWeights { vulnerability: 2.0, threat: 1.0, anomaly: 1.0 };
        let idx = CommunityTrustIndex::from_parts(0.4, 0.0, 0.0, &w);
        assert!((idx.combined - 0.8).abs() < 1e-12);
    }

    #[test]
    fn vulnerability_and_anomaly_components() {
        let r = residents(4);
        let mut vdb = Vdb::new();
        vdb.disclose(r[0], Severity::High, 100);
        vdb.disclose(r[1], Severity::Low, 100);
        vdb.fix(r[1], 110);
        // r[2] has a baseline of 5 and sent 10 last second; r[3] idle.
        let mut h = vec![AccessHistory::new(100); 4];
        h[2] = AccessHistory::from_counts(100, [(10, 4), (20, 6), (119, 10)]);
        let idx = community_indices(
            &Ledger::new(),
            &vdb,
            &r,
            &h,
            120,
            30,
            &IndexWeights::default(),
            &AbdParams::default(),
        );
        assert!((idx.vuln_risk_index - 0.25).abs() < 1e-12);
        assert!((idx.anomaly_index - 1.0).abs() < 1e-12);
    }

    proptest::proptest! {
        #[test]
        fn indices_stay_in_unit_interval(
            reports in proptest::collection::vec(0usize..20, 0..30),
            vulns in proptest::collection::vec((0usize..20, proptest::bool::ANY), 0..30),
            counts in proptest::collection::vec((0usize..20, 0u64..150, 0u32..100), 0..60),
            now in 0u64..200,
            window in 0u64..60,
            w in (0.0f64..5.0, 0.0f64..5.0, 0.01f64..5.0),
        ) {
            let r = residents(20);
            let mut ledger = Ledger::new();
            let mut reports = reports;
            reports.sort_unstable();
            for (k, ue) in reports.iter().enumerate() {
                ledger.append(LedgerEvent::new(k as u64 * 5, EventKind::AttackReport, r[*ue])).unwrap();
            }
            let mut vdb = Vdb::new();
            for (ue, fixed) in vulns {
                vdb.disclose(r[ue], Severity::High, 50);
                if fixed { vdb.fix(r[ue], 90); }
            }
            let mut h = vec![AccessHistory::new(100); 20];
            let mut counts = counts;
            counts.sort_by_key(|c| c.1);
            for (ue, t, n) in counts { h[ue].record(t, n); }
            let weights = IndexWeights { vulnerability: w.0, threat: w.1, anomaly: w.2 };
            let idx = community_indices(&ledger, &vdb, &r, &h, now, window, &weights, &AbdParams::default());
            for x in [idx.vuln_risk_index, idx.threat_index, idx.anomaly_index, idx.combined] {
                proptest::prop_assert!((0.0..=1.0).contains(&x));
            }
        }
    }
}
