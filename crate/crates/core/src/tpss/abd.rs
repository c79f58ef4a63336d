//! Anomalous behaviour detector: a z-score of a UE's latest access rate
//! against its baseline, squashed into [0, 1].

use serde::{Deserialize, Serialize};

use crate::domain::Second;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AbdParams {
    /// z at which the score saturates at 1.
    #[serde(default = "default_z_max")]
    pub z_max: f64,
    /// Lower bound on the baseline standard deviation.
    #[serde(default = "default_sigma_floor")]
    pub sigma_floor: f64,
    /// Score when the UE has no baseline.
    #[serde(default = "default_no_history")]
    pub no_history_score: f64,
}

fn default_z_max() -> f64 {
    5.0
}
fn default_sigma_floor() -> f64 {
    1.0
}
fn default_no_history() -> f64 {
    0.5
}

impl Default for AbdParams {
    fn default() -> Self {
        Self {
            z_max: default_z_max(),
            sigma_floor: default_sigma_floor(),
            no_history_score: default_no_history(),
        }
    }
}

/// Mean and population standard deviation of the baseline seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Baseline {
    pub mean: f64,
    pub std_dev: f64,
}

/// A UE's outbound access log as kept by its home community: packets per
/// second, for the seconds in which it sent anything.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AccessHistory {
    entries: Vec<(Second, u32)>,
    baseline_end: Second,
}

impl AccessHistory {
    /// Seconds before `baseline_end` form the reference behaviour.
    pub fn new(baseline_end: Second) -> Self {
        Self {
            entries: Vec::new(),
            baseline_end,
        }
    }

    pub fn from_counts(baseline_end: Second, counts: impl IntoIterator<Item = (Second, u32)>) -> Self {
        let mut h = Self::new(baseline_end);
        for (t, n) in counts {
            h.record(t, n);
        }
        h
    }

    /// Adds packets sent during second `t`. Seconds must be recorded in
    /// non-decreasing order.
    pub fn record(&mut self, t: Second, packets: u32) {
        match self.entries.last_mut() {
            Some((last, n)) if *last == t => *n += packets,
            Some((last, _)) => {
                assert!(t > *last, "access log time went backwards");
                self.entries.push((t, packets));
            }
            None => self.entries.push((t, packets)),
        }
    }

    pub fn entries(&self) -> &[(Second, u32)] {
        &self.entries
    }

    pub fn last_active(&self) -> Option<Second> {
        self.entries.last().map(|e| e.0)
    }

    pub fn baseline(&self) -> Option<Baseline> {
        let base = self.entries.iter().take_while(|e| e.0 < self.baseline_end);
        let (mut n, mut sum, mut sq) = (0usize, 0.0, 0.0);
        for &(_, c) in base {
            let c = c as f64;
            n += 1;
            sum += c;
            sq += c * c;
        }
        if n == 0 {
            return None;
        }
        let mean = sum / n as f64;
        let var = (sq / n as f64 - mean * mean).max(0.0);
        Some(Baseline {
            mean,
            std_dev: var.sqrt(),
        })
    }

    /// Packets in the most recent logged second, provided that second is
    /// `now` or `now - 1`; zero otherwise.
    pub fn current_rate(&self, now: Second) -> f64 {
        self.entries
            .iter()
            .rev()
            .find(|e| e.0 <= now)
            .filter(|e| e.0 + 1 >= now)
            .map_or(0.0, |e| e.1 as f64)
    }
}

/// Normalised deviation of `rate` from `baseline`.
pub fn score_rate(rate: f64, baseline: Option<Baseline>, params: &AbdParams) -> f64 {
    let Some(b) = baseline else {
        return params.no_history_score;
    };
    let sigma = b.std_dev.max(params.sigma_floor);
    let z = (rate - b.mean) / sigma;
    (z / params.z_max).clamp(0.0, 1.0)
}

pub fn abd_score(history: &AccessHistory, now: Second, params: &AbdParams) -> f64 {
    score_rate(history.current_rate(now), history.baseline(), params)
}
