//! Replicated runs and validity-period sweeps.

use std::collections::BTreeMap;

use rayon::prelude::*;

use super::metrics::{average, AveragedMetrics, RunMetrics};
use super::run::run;
use super::scenario::{Scenario, ScenarioError};
use crate::domain::Second;

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloResult {
    pub runs: Vec<RunMetrics>,
    pub averaged: AveragedMetrics,
}

/// Runs every seed, in parallel on the current rayon pool; results keep
/// seed order.
pub fn run_batch(scenario: &Scenario, seeds: &[u64]) -> Result<Vec<RunMetrics>, ScenarioError> {
    scenario.validate()?;
    seeds.par_iter().map(|&seed| run(scenario, seed)).collect()
}

/// `runs` replications with seeds `base_seed`, `base_seed + 1`, ...
pub fn run_monte_carlo(
    scenario: &Scenario,
    runs: usize,
    base_seed: u64,
) -> Result<MonteCarloResult, ScenarioError> {
    if runs == 0 {
        return Err(ScenarioError::Invalid {
            field: "runs".into(),
            message: "must be at least 1".into(),
        });
    }
    let seeds: Vec<u64> = (0..runs as u64).map(|i| base_seed.wrapping_add(i)).collect();
    let runs = run_batch(scenario, &seeds)?;
    let averaged = average(&runs);
    Ok(MonteCarloResult { runs, averaged })
}

/// One Monte Carlo batch per validity period, using the scenario's run
/// count and seed schedule for each.
pub fn sweep_validity(
    scenario: &Scenario,
    periods: &[Second],
) -> Result<BTreeMap<Second, MonteCarloResult>, ScenarioError> {
    let mut out = BTreeMap::new();
    for &p in periods {
        let mut s = scenario.clone();
        s.engine.validity_period_s = p;
        s.validate()?;
        let result = run_monte_carlo(&s, scenario.monte_carlo.runs, scenario.monte_carlo.base_seed)?;
        out.insert(p, result);
    }
    Ok(out)
}
