//! Beta-reputation trust held by a destination community about sources.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::domain::{CommunityId, UeId};

/// Pseudo-counts added to observed evidence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Priors {
    pub good: f64,
    pub bad: f64,
}

impl Default for Priors {
    /// A fresh UE scores 0.8; one unit of bad evidence drops it to 8/11.
    fn default() -> Self {
        Self { good: 8.0, bad: 2.0 }
    }
}

impl Priors {
    pub fn is_valid(&self) -> bool {
        self.good.is_finite() && self.bad.is_finite() && self.good > 0.0 && self.bad > 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaTrust {
    pub good: u64,
    pub bad: u64,
    pub prior_good: f64,
    pub prior_bad: f64,
}

impl BetaTrust {
    pub fn new(good: u64, bad: u64) -> Self {
        Self::with_priors(good, bad, Priors::default())
    }

    pub fn with_priors(good: u64, bad: u64, priors: Priors) -> Self {
        debug_assert!(priors.is_valid());
        Self {
            good,
            bad,
            prior_good: priors.good,
            prior_bad: priors.bad,
        }
    }

    /// Posterior mean `(good + a) / (good + bad + a + b)`.
    pub fn value(&self) -> f64 {
        let g = self.good as f64 + self.prior_good;
        g / (g + self.bad as f64 + self.prior_bad)
    }
}

pub fn beta_trust_value(bt: &BetaTrust) -> f64 {
    bt.value()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Evidence {
    pub good: u64,
    pub bad: u64,
}

/// Evidence every destination community holds about each source UE.
#[derive(Debug, Clone, Default)]
pub struct TrustTable {
    priors: Priors,
    evidence: HashMap<(CommunityId, UeId), Evidence>,
}

impl TrustTable {
    pub fn new(priors: Priors) -> Self {
        Self {
            priors,
            evidence: HashMap::new(),
        }
    }

    pub fn get(&self, holder: CommunityId, source: UeId) -> BetaTrust {
        let e = self
            .evidence
            .get(&(holder, source))
            .copied()
            .unwrap_or_default();
        BetaTrust::with_priors(e.good, e.bad, self.priors)
    }

    pub fn record_good(&mut self, holder: CommunityId, source: UeId, amount: u64) {
        self.evidence.entry((holder, source)).or_default().good += amount;
    }

    pub fn record_bad(&mut self, holder: CommunityId, source: UeId, amount: u64) {
        self.evidence.entry((holder, source)).or_default().bad += amount;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prior_values() {
        assert!((BetaTrust::new(0, 0).value() - 0.8).abs() < 1e-12);
        assert!((BetaTrust::new(0, 1).value() - 8.0 / 11.0).abs() < 1e-12);
        let uniform = Priors { good: 1.0, bad: 1.0 };
        assert!((BetaTrust::with_priors(0, 0, uniform).value() - 0.5).abs() < 1e-12);
        assert!(!Priors { good: 0.0, bad: 0.0 }.is_valid());
    }

    #[test]
    fn table_defaults_to_priors() {
        let mut t = TrustTable::new(Priors::default());
        let ue = UeId::new(1, 2, 3);
        assert!((t.get(4, ue).value() - 0.8).abs() < 1e-12);
        t.record_bad(4, ue, 1);
        t.record_good(4, ue, 2);
        assert_eq!((t.get(4, ue).good, t.get(4, ue).bad), (2, 1));
        assert_eq!(t.get(3, ue).bad, 0);
    }

    proptest::proptest! {
        #[test]
        fn strictly_monotone(good in 0u64..10_000, bad in 0u64..10_000, a in 0.01f64..50.0, b in 0.01f64..50.0) {
            let p = Priors { good: a, bad: b };
            let v = BetaTrust::with_priors(good, bad, p).value();
            proptest::prop_assert!(v > 0.0 && v < 1.0);
            proptest::prop_assert!(BetaTrust::with_priors(good, bad + 1, p).value() < v);
            proptest::prop_assert!(BetaTrust::with_priors(good + 1, bad, p).value() > v);
        }
    }
}
