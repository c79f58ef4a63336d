//! Per-second run metrics, Monte Carlo averages and CSV output.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::domain::{Second, UeId};
use crate::epidemic::SirCounts;
use crate::trust::{Architecture, Verdict};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecondRow {
    pub t: Second,
    pub attack_total: u64,
    pub attack_blocked: u64,
    pub attack_delivered: u64,
    pub filtering_rate: f64,
    pub accum_filtering_rate: f64,
    pub missed_cum: u64,
    /// One entry per community, in name order.
    pub sir: Vec<SirCounts>,
}

/// The first attack request a source sent to the measured community.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FirstExposure {
    pub source: UeId,
    pub t: Second,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub seed: u64,
    pub architecture: Architecture,
    pub validity_period_s: Second,
    /// First second counted in the attack metrics.
    pub metrics_start: Second,
    /// Last simulated second.
    pub end: Second,
    pub attack_total: u64,
    pub attack_blocked: u64,
    pub accumulated_filtering_rate: f64,
    pub missed_total: u64,
    /// Second at which no UE remained infected, unless the run hit its cap.
    pub extinction_time: Option<Second>,
    pub final_recovered: usize,
    /// Destination evaluations performed (cache misses).
    pub evaluations: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub community_names: Vec<String>,
    pub rows: Vec<SecondRow>,
    pub summary: RunSummary,
    pub first_exposures: Vec<FirstExposure>,
}

pub fn rate(blocked: u64, total: u64) -> f64 {
    if total == 0 {
        1.0
    } else {
        blocked as f64 / total as f64
    }
}

impl RunMetrics {
    /// Rows of the measured attack window: from `metrics_start` up to, not
    /// including, the final second.
    pub fn attack_window(&self) -> &[SecondRow] {
        let from = self
            .rows
            .partition_point(|r| r.t < self.summary.metrics_start);
        let to = self.rows.len().saturating_sub(1).max(from);
        &self.rows[from..to]
    }

    /// Mean per-second filtering rate over the first and last thirds of the
    /// attack window. Seconds without attack packets are skipped; `None`
    /// when either third has none.
    pub fn ramp(&self) -> Option<(f64, f64)> {
        let w = self.attack_window();
        let k = w.len() / 3;
        let mean = |rows: &[SecondRow]| {
            let live: Vec<f64> = rows
                .iter()
                .filter(|r| r.attack_total > 0)
                .map(|r| r.filtering_rate)
                .collect();
            (!live.is_empty()).then(|| live.iter().sum::<f64>() / live.len() as f64)
        };
        if k == 0 {
            return None;
        }
        Some((mean(&w[..k])?, mean(&w[w.len() - k..])?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    /// Sample standard deviation; zero for a single value.
    pub std_dev: f64,
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl Stat {
    /// # Panics
    /// If `values` is empty.
    pub fn of(values: &[f64]) -> Self {
        assert!(!values.is_empty(), "no values");
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let std_dev = if n > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self { mean, std_dev, min, max, n }
    }

    pub fn std_error(&self) -> f64 {
        self.std_dev / (self.n as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AveragedRow {
    pub t: Second,
    pub attack_total: f64,
    pub attack_blocked: f64,
    pub attack_delivered: f64,
    pub filtering_rate: f64,
    pub accum_filtering_rate: f64,
    pub missed_cum: f64,
    pub sir: Vec<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AveragedSummary {
    pub runs: usize,
    pub seeds: Vec<u64>,
    pub architecture: Architecture,
    pub validity_period_s: Second,
    pub accumulated_filtering_rate: Stat,
    pub missed_total: Stat,
    /// Over runs that went extinct before the cap.
    pub extinction_time: Option<Stat>,
    pub final_recovered: Stat,
    pub evaluations: Stat,
    pub capped_runs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AveragedMetrics {
    pub community_names: Vec<String>,
    pub rows: Vec<AveragedRow>,
    pub summary: AveragedSummary,
}

/// Aligns runs on `t` and averages them. A run that ended early
/// contributes no attack traffic afterwards, a per-second rate of 1 and
/// its final cumulative and SIR values.
///
/// # Panics
/// If `runs` is empty.
pub fn average(runs: &[RunMetrics]) -> AveragedMetrics {
    assert!(!runs.is_empty(), "nothing to average");
    let first = &runs[0];
    let len = runs.iter().map(|r| r.rows.len()).max().unwrap_or(0);
    let k = runs.len() as f64;
    let c = first.community_names.len();
    let mut rows = Vec::with_capacity(len);
    for idx in 0..len {
        let mut row = AveragedRow {
            t: idx as Second,
            attack_total: 0.0,
            attack_blocked: 0.0,
            attack_delivered: 0.0,
            filtering_rate: 0.0,
            accum_filtering_rate: 0.0,
            missed_cum: 0.0,
            sir: vec![[0.0; 3]; c],
        };
        for run in runs {
            let (r, live) = match run.rows.get(idx) {
                Some(r) => (r, true),
                None => (run.rows.last().expect("runs have rows"), false),
            };
            if live {
                row.attack_total += r.attack_total as f64;
                row.attack_blocked += r.attack_blocked as f64;
                row.attack_delivered += r.attack_delivered as f64;
                row.filtering_rate += r.filtering_rate;
            } else {
                row.filtering_rate += 1.0;
            }
            row.accum_filtering_rate += r.accum_filtering_rate;
            row.missed_cum += r.missed_cum as f64;
            for (acc, s) in row.sir.iter_mut().zip(&r.sir) {
                acc[0] += s.s as f64;
                acc[1] += s.i as f64;
                acc[2] += s.r as f64;
            }
        }
        row.attack_total /= k;
        row.attack_blocked /= k;
        row.attack_delivered /= k;
        row.filtering_rate /= k;
        row.accum_filtering_rate /= k;
        row.missed_cum /= k;
        for acc in &mut row.sir {
            acc.iter_mut().for_each(|v| *v /= k);
        }
        rows.push(row);
    }

    let collect = |f: &dyn Fn(&RunSummary) -> f64| -> Vec<f64> { runs.iter().map(|r| f(&r.summary)).collect() };
    let extinct: Vec<f64> = runs
        .iter()
        .filter_map(|r| r.summary.extinction_time.map(|t| t as f64))
        .collect();
    let summary = AveragedSummary {
        runs: runs.len(),
        seeds: runs.iter().map(|r| r.summary.seed).collect(),
        architecture: first.summary.architecture,
        validity_period_s: first.summary.validity_period_s,
        accumulated_filtering_rate: Stat::of(&collect(&|s| s.accumulated_filtering_rate)),
        missed_total: Stat::of(&collect(&|s| s.missed_total as f64)),
        extinction_time: (!extinct.is_empty()).then(|| Stat::of(&extinct)),
        final_recovered: Stat::of(&collect(&|s| s.final_recovered as f64)),
        evaluations: Stat::of(&collect(&|s| s.evaluations as f64)),
        capped_runs: runs.len() - extinct.len(),
    };
    AveragedMetrics {
        community_names: first.community_names.clone(),
        rows,
        summary,
    }
}

/// Formats with six significant digits, like C's `%.6g`.
pub fn fmt_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa.to_string()), exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub const BASE_COLUMNS: [&str; 7] = [
    "t",
    "attack_total",
    "attack_blocked",
    "attack_delivered",
    "filtering_rate",
    "accum_filtering_rate",
    "missed_cum",
];

pub fn csv_header(community_names: &[String]) -> Vec<String> {
    let mut cols: Vec<String> = BASE_COLUMNS.iter().map(|s| s.to_string()).collect();
    for name in community_names {
        for prefix in ["S", "I", "R"] {
            cols.push(format!("{prefix}_{name}"));
        }
    }
    cols
}

/// Community names in the order used by the CSV columns.
fn name_order(names: &[String]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..names.len()).collect();
    order.sort_by(|&a, &b| names[a].cmp(&names[b]));
    order
}

pub fn write_run_csv<W: Write>(out: &mut W, metrics: &RunMetrics) -> io::Result<()> {
    let order = name_order(&metrics.community_names);
    let names: Vec<String> = order.iter().map(|&k| metrics.community_names[k].clone()).collect();
    writeln!(out, "{}", csv_header(&names).join(","))?;
    for r in &metrics.rows {
        write!(
            out,
            "{},{},{},{},{},{},{}",
            r.t,
            r.attack_total,
            r.attack_blocked,
            r.attack_delivered,
            fmt_sig6(r.filtering_rate),
            fmt_sig6(r.accum_filtering_rate),
            r.missed_cum
        )?;
        for &k in &order {
            let s = r.sir[k];
            write!(out, ",{},{},{}", s.s, s.i, s.r)?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn write_averaged_csv<W: Write>(out: &mut W, metrics: &AveragedMetrics) -> io::Result<()> {
    let order = name_order(&metrics.community_names);
    let names: Vec<String> = order.iter().map(|&k| metrics.community_names[k].clone()).collect();
    writeln!(out, "{}", csv_header(&names).join(","))?;
    for r in &metrics.rows {
        let base = [
            r.attack_total,
            r.attack_blocked,
            r.attack_delivered,
            r.filtering_rate,
            r.accum_filtering_rate,
            r.missed_cum,
        ];
        write!(out, "{}", r.t)?;
        for v in base {
            write!(out, ",{}", fmt_sig6(v))?;
        }
        for &k in &order {
            for v in r.sir[k] {
                write!(out, ",{}", fmt_sig6(v))?;
            }
        }
        writeln!(out)?;
    }
    Ok(())
}
