//! Time-stepped experiment driver.

pub mod metrics;
pub mod monte_carlo;
pub mod run;
pub mod scenario;

pub use metrics::{
    average, fmt_sig6, write_averaged_csv, write_run_csv, AveragedMetrics, AveragedRow, AveragedSummary,
    FirstExposure, RunMetrics, RunSummary, SecondRow, Stat,
};
pub use monte_carlo::{run_batch, run_monte_carlo, sweep_validity, MonteCarloResult};
pub use run::{run, Streams};
pub use scenario::{Scenario, ScenarioError, Stage};
