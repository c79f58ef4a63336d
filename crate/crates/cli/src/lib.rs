//! Command implementations behind the `zt6g` binary.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;
use zt6g_core::engine::{
    fmt_sig6, run, run_monte_carlo, sweep_validity, write_averaged_csv, write_run_csv, AveragedMetrics,
    AveragedSummary, MonteCarloResult, RunMetrics, RunSummary, Scenario, Stat,
};
use zt6g_core::trust::Architecture;
use zt6g_core::Second;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{0}")]
    Validation(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Validation(_) => 2,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Parser)]
#[command(name = "zt6g", version, about = "Zero-trust 6G community architecture simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One seeded run.
    Run(RunArgs),
    /// Monte Carlo comparison of architectures.
    Compare(CompareArgs),
    /// Monte Carlo sweep over validity periods.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Scenario JSON file.
    #[arg(long)]
    pub scenario: PathBuf,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Worker threads for Monte Carlo runs.
    #[arg(long, env = "ZT6G_JOBS")]
    pub jobs: Option<usize>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: Common,
    /// Defaults to the scenario's base seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the scenario's architecture.
    #[arg(long)]
    pub arch: Option<String>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub runs: Option<usize>,
    /// Comma-separated architectures.
    #[arg(long, default_value = "zta6g,tbpf,tris")]
    pub arch: String,
    /// Also write every run's CSV.
    #[arg(long)]
    pub per_run: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub runs: Option<usize>,
    /// Comma-separated validity periods in seconds; defaults to the
    /// scenario's sweep list.
    #[arg(long)]
    pub periods: Option<String>,
    #[arg(long)]
    pub per_run: bool,
}

/// Parses `args` (program name first) and executes the command.
pub fn main_with_args<I, T>(args: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return Ok(());
        }
        Err(e) => return Err(CliError::Validation(e.render().to_string().trim_end().to_string())),
    };
    match cli.command {
        Command::Run(a) => cmd_run(&a),
        Command::Compare(a) => cmd_compare(&a),
        Command::Sweep(a) => cmd_sweep(&a),
    }
}

pub fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    Scenario::from_json(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

pub fn parse_architectures(list: &str) -> Result<Vec<Architecture>, CliError> {
    let mut out = Vec::new();
    for name in list.split(',').map(str::trim) {
        let arch: Architecture = name.parse().map_err(|e| CliError::Validation(format!("--arch: {e}")))?;
        if out.contains(&arch) {
            eprintln!("warning: architecture {arch} listed more than once; duplicate ignored");
        } else {
            out.push(arch);
        }
    }
    Ok(out)
}

pub fn parse_periods(list: &str) -> Result<Vec<Second>, CliError> {
    let mut out = Vec::new();
    for item in list.split(',').map(str::trim) {
        let p: Second = item
            .parse()
            .map_err(|_| CliError::Validation(format!("--periods: {item:?} is not a whole number of seconds")))?;
        if p == 0 {
            return Err(CliError::Validation("--periods: periods must be at least 1".into()));
        }
        if out.contains(&p) {
            eprintln!("warning: period {p} listed more than once; duplicate ignored");
        } else {
            out.push(p);
        }
    }
    Ok(out)
}

fn validate(scenario: &Scenario) -> Result<(), CliError> {
    scenario.validate().map_err(|e| CliError::Validation(e.to_string()))
}

fn with_pool<R: Send>(jobs: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R, CliError> {
    match jobs {
        None => Ok(f()),
        Some(0) => Err(CliError::Validation("--jobs must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Validation(format!("--jobs: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Everything needed to regenerate an output bundle.
#[derive(Debug, Serialize)]
struct Resolved<'a> {
    command: &'static str,
    seed: u64,
    runs: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    architectures: Vec<Architecture>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    periods: Vec<Second>,
    scenario: &'a Scenario,
}

#[derive(Debug, Serialize)]
struct Ramp {
    first_third: f64,
    last_third: f64,
}

#[derive(Debug, Serialize)]
struct RunReport<'a> {
    #[serde(flatten)]
    summary: &'a RunSummary,
    ramp: Option<Ramp>,
}

#[derive(Debug, Serialize)]
struct BatchReport<'a> {
    #[serde(flatten)]
    summary: &'a AveragedSummary,
    /// Mean over runs of each run's first- and last-third filtering rate.
    ramp: Option<Ramp>,
    /// Standard error of the mean accumulated filtering rate.
    accumulated_std_error: f64,
}

fn ramp_of(runs: &[RunMetrics]) -> Option<Ramp> {
    let r: Vec<(f64, f64)> = runs.iter().filter_map(RunMetrics::ramp).collect();
    if r.is_empty() {
        return None;
    }
    let n = r.len() as f64;
    Some(Ramp {
        first_third: r.iter().map(|x| x.0).sum::<f64>() / n,
        last_third: r.iter().map(|x| x.1).sum::<f64>() / n,
    })
}

fn batch_report(mc: &MonteCarloResult) -> BatchReport<'_> {
    let acc: &Stat = &mc.averaged.summary.accumulated_filtering_rate;
    BatchReport {
        summary: &mc.averaged.summary,
        ramp: ramp_of(&mc.runs),
        accumulated_std_error: acc.std_error(),
    }
}

fn create_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(io_err(path))
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<fs::File>) -> io::Result<()>) -> Result<(), CliError> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    f(&mut w).and_then(|_| w.flush()).map_err(io_err(path))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    write_file(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value).map_err(io::Error::other)?;
        writeln!(w)
    })
}

fn write_per_run(dir: &Path, runs: &[RunMetrics]) -> Result<(), CliError> {
    create_dir(dir)?;
    for m in runs {
        let path = dir.join(format!("seed{}.csv", m.summary.seed));
        write_file(&path, |w| write_run_csv(w, m))?;
    }
    Ok(())
}

/// One row per second with the rate columns of every labelled series side
/// by side. Shorter series are padded as in Monte Carlo averaging.
pub fn write_joined_csv<W: Write>(out: &mut W, series: &[(String, &AveragedMetrics)]) -> io::Result<()> {
    let mut header = vec!["t".to_string()];
    for (label, _) in series {
        for col in ["filtering_rate", "accum_filtering_rate", "missed_cum"] {
            header.push(format!("{label}_{col}"));
        }
    }
    writeln!(out, "{}", header.join(","))?;
    let len = series.iter().map(|(_, m)| m.rows.len()).max().unwrap_or(0);
    for idx in 0..len {
        write!(out, "{idx}")?;
        for (_, m) in series {
            let (rate, row) = match m.rows.get(idx) {
                Some(r) => (r.filtering_rate, r),
                None => (1.0, m.rows.last().expect("series have rows")),
            };
            write!(
                out,
                ",{},{},{}",
                fmt_sig6(rate),
                fmt_sig6(row.accum_filtering_rate),
                fmt_sig6(row.missed_cum)
            )?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn cmd_run(args: &RunArgs) -> Result<(), CliError> {
    let mut scenario = load_scenario(&args.common.scenario)?;
    if let Some(a) = &args.arch {
        scenario.engine.architecture = a.parse().map_err(|e| CliError::Validation(format!("--arch: {e}")))?;
    }
    let seed = args.seed.unwrap_or(scenario.monte_carlo.base_seed);
    validate(&scenario)?;
    let metrics = with_pool(args.common.jobs, || run(&scenario, seed))?
        .map_err(|e| CliError::Validation(e.to_string()))?;

    let out = &args.common.out;
    create_dir(out)?;
    write_file(&out.join("run.csv"), |w| write_run_csv(w, &metrics))?;
    let report = RunReport {
        summary: &metrics.summary,
        ramp: metrics.ramp().map(|(a, b)| Ramp {
            first_third: a,
            last_third: b,
        }),
    };
    write_json(&out.join("summary.json"), &report)?;
    write_json(
        &out.join("resolved.json"),
        &Resolved {
            command: "run",
            seed,
            runs: 1,
            architectures: vec![],
            periods: vec![],
            scenario: &scenario,
        },
    )
}

pub fn cmd_compare(args: &CompareArgs) -> Result<(), CliError> {
    let mut scenario = load_scenario(&args.common.scenario)?;
    let archs = parse_architectures(&args.arch)?;
    if let Some(r) = args.runs {
        scenario.monte_carlo.runs = r;
    }
    if let Some(s) = args.seed {
        scenario.monte_carlo.base_seed = s;
    }
    validate(&scenario)?;
    let (runs, seed) = (scenario.monte_carlo.runs, scenario.monte_carlo.base_seed);

    let results = with_pool(args.common.jobs, || {
        archs
            .iter()
            .map(|&a| {
                let mut s = scenario.clone();
                s.engine.architecture = a;
                run_monte_carlo(&s, runs, seed).map(|r| (a, r))
            })
            .collect::<Result<Vec<_>, _>>()
    })?
    .map_err(|e| CliError::Validation(e.to_string()))?;

    let out = &args.common.out;
    create_dir(out)?;
    let mut reports = BTreeMap::new();
    for (arch, mc) in &results {
        write_file(&out.join(format!("{arch}.csv")), |w| write_averaged_csv(w, &mc.averaged))?;
        if args.per_run {
            write_per_run(&out.join("runs").join(arch.as_str()), &mc.runs)?;
        }
        reports.insert(arch.as_str(), batch_report(mc));
    }
    let joined: Vec<(String, &AveragedMetrics)> =
        results.iter().map(|(a, mc)| (a.to_string(), &mc.averaged)).collect();
    write_file(&out.join("comparison.csv"), |w| write_joined_csv(w, &joined))?;
    write_json(&out.join("summary.json"), &reports)?;
    write_json(
        &out.join("resolved.json"),
        &Resolved {
            command: "compare",
            seed,
            runs,
            architectures: archs,
            periods: vec![],
            scenario: &scenario,
        },
    )
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<(), CliError> {
    let mut scenario = load_scenario(&args.common.scenario)?;
    let periods = match &args.periods {
        Some(list) => parse_periods(list)?,
        None => scenario.sweep_periods_s.clone(),
    };
    if periods.is_empty() {
        return Err(CliError::Validation(
            "no validity periods: pass --periods or set sweep_periods_s".into(),
        ));
    }
    if let Some(r) = args.runs {
        scenario.monte_carlo.runs = r;
    }
    if let Some(s) = args.seed {
        scenario.monte_carlo.base_seed = s;
    }
    scenario.sweep_periods_s = periods.clone();
    validate(&scenario)?;

    let results = with_pool(args.common.jobs, || sweep_validity(&scenario, &periods))?
        .map_err(|e| CliError::Validation(e.to_string()))?;

    let out = &args.common.out;
    create_dir(out)?;
    let mut reports = BTreeMap::new();
    for (p, mc) in &results {
        write_file(&out.join(format!("p{p}.csv")), |w| write_averaged_csv(w, &mc.averaged))?;
        if args.per_run {
            write_per_run(&out.join("runs").join(format!("p{p}")), &mc.runs)?;
        }
        reports.insert(format!("p{p}"), batch_report(mc));
    }
    let joined: Vec<(String, &AveragedMetrics)> =
        results.iter().map(|(p, mc)| (format!("p{p}"), &mc.averaged)).collect();
    write_file(&out.join("sweep.csv"), |w| write_joined_csv(w, &joined))?;
    write_json(&out.join("summary.json"), &reports)?;
    write_json(
        &out.join("resolved.json"),
        &Resolved {
            command: "sweep",
            seed: scenario.monte_carlo.base_seed,
            runs: scenario.monte_carlo.runs,
            architectures: vec![scenario.engine.architecture],
            periods,
            scenario: &scenario,
        },
    )
}
