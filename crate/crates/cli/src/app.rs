//! Command-line definition and subcommand drivers.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use hamint::analysis::observed_orders;

use crate::config::Settings;
use crate::error::{CliError, CliResult};
use crate::experiment::{
    convergence_errors, ConvergenceMetric, ExperimentSpec, Grid, Outcome, EXPERIMENT_KEYS,
};
use crate::output::{convergence_csv, series_csv, summary_csv, write_file};

/// Environment variable capping the worker threads of `sweep` and
/// `convergence`.
pub const THREADS_ENV: &str = "HAMINT_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "hamint",
    version,
    about = "Run Hamiltonian integrator benchmarks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one problem with one method and step size.
    Run(RunArgs),
    /// Integrate every combination of step sizes and methods into one table.
    Sweep(SweepArgs),
    /// Observed convergence orders over a list of step sizes.
    Convergence(ConvergenceArgs),
}

/// Flags shared by every subcommand. Any of them may instead come from the
/// `--config` file; flags win.
#[derive(Debug, Clone, Default, Args)]
pub struct ExperimentArgs {
    /// Flat `key = value` file with defaults for any flag below.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// sho | kepler | argon
    #[arg(long)]
    pub problem: Option<String>,
    /// Kepler eccentricity in [0, 1).
    #[arg(long = "e")]
    pub eccentricity: Option<String>,
    /// Argon initial-condition file (defaults to the bundled configuration).
    #[arg(long)]
    pub argon_data: Option<String>,
    /// cgp1 | cgp2 | cgp3 | irk4 | glm:<file|euler|gauss2>; a comma list
    /// for sweep.
    #[arg(long)]
    pub method: Option<String>,
    /// Step size, e.g. 0.05 or 2pi/1600 (fsec for argon); a comma list for
    /// sweep and convergence.
    #[arg(long)]
    pub h: Option<String>,
    /// End time (fsec for argon).
    #[arg(long)]
    pub tend: Option<String>,
    /// Kepler: number of orbits of period 2π.
    #[arg(long)]
    pub periods: Option<String>,
    /// Record every n-th step (default: every step up to 10^6 samples).
    #[arg(long)]
    pub stride: Option<String>,
    /// Stage solver: fixed (fixed-point, default) | newton
    #[arg(long)]
    pub solver: Option<String>,
    /// Stage solver iteration cap (default 50).
    #[arg(long)]
    pub max_iter: Option<String>,
    /// Stage solver tolerance (default 1e-14).
    #[arg(long)]
    pub tol: Option<String>,
    /// Retry failed fixed-point solves with Newton: true | false
    #[arg(long)]
    pub newton_fallback: Option<String>,
}

impl ExperimentArgs {
    fn flags(&self) -> Vec<(&'static str, Option<String>)> {
        vec![
            ("problem", self.problem.clone()),
            ("e", self.eccentricity.clone()),
            ("argon-data", self.argon_data.clone()),
            ("method", self.method.clone()),
            ("h", self.h.clone()),
            ("tend", self.tend.clone()),
            ("periods", self.periods.clone()),
            ("stride", self.stride.clone()),
            ("solver", self.solver.clone()),
            ("max-iter", self.max_iter.clone()),
            ("tol", self.tol.clone()),
            ("newton-fallback", self.newton_fallback.clone()),
        ]
    }

    fn settings(&self, extra: Vec<(&'static str, Option<String>)>) -> CliResult<Settings> {
        let mut flags = self.flags();
        let mut allowed: Vec<&str> = EXPERIMENT_KEYS.to_vec();
        allowed.extend(extra.iter().map(|(k, _)| *k));
        flags.extend(extra);
        Settings::resolve(self.config.as_deref(), &flags, &allowed)
    }
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub experiment: ExperimentArgs,
    /// Series CSV path (t, states, e_g, e_e).
    #[arg(long)]
    pub series: Option<String>,
    /// Summary CSV path (default: standard output).
    #[arg(long)]
    pub summary: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub experiment: ExperimentArgs,
    /// Directory for one series CSV per combination.
    #[arg(long)]
    pub series_dir: Option<String>,
    /// Summary CSV path (default: standard output).
    #[arg(long)]
    pub summary: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct ConvergenceArgs {
    #[command(flatten)]
    pub experiment: ExperimentArgs,
    /// global | energy
    #[arg(long)]
    pub metric: Option<String>,
    /// Output CSV path (default: standard output).
    #[arg(long)]
    pub out: Option<String>,
}

pub fn execute(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Run(args) => run(args),
        Command::Sweep(args) => sweep(args),
        Command::Convergence(args) => convergence(args),
    }
}

fn emit(path: Option<&str>, contents: &str) -> CliResult<()> {
    match path {
        Some(path) => write_file(Path::new(path), contents),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn thread_pool() -> CliResult<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(value) = std::env::var(THREADS_ENV) {
        let n: usize =
            value.parse().ok().filter(|n| *n > 0).ok_or_else(|| {
                CliError::usage(format!("{THREADS_ENV} must be a positive integer"))
            })?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| CliError::usage(format!("cannot start worker threads: {e}")))
}

fn run_all(specs: &[ExperimentSpec]) -> CliResult<Vec<Outcome>> {
    let pool = thread_pool()?;
    Ok(pool.install(|| specs.par_iter().map(ExperimentSpec::outcome).collect()))
}

fn run(args: RunArgs) -> CliResult<()> {
    let settings = args.experiment.settings(vec![
        ("series", args.series.clone()),
        ("summary", args.summary.clone()),
    ])?;
    let spec = Grid::from_settings(&settings)?.single()?;
    let (problem, record) = spec.execute()?;
    if let Some(path) = settings.get("series") {
        write_file(Path::new(path), &series_csv(&problem, &record))?;
    }
    let outcome = Outcome {
        planned_steps: record.steps,
        spec,
        result: Ok((problem, record)),
    };
    emit(settings.get("summary"), &summary_csv(&[outcome]))
}

/// File-name friendly form of a method id.
fn slug(text: &str) -> String {
    text.chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect()
}

fn sweep(args: SweepArgs) -> CliResult<()> {
    let settings = args.experiment.settings(vec![
        ("series-dir", args.series_dir.clone()),
        ("summary", args.summary.clone()),
    ])?;
    let grid = Grid::from_settings(&settings)?;
    let specs = grid.expand();
    let outcomes = run_all(&specs)?;
    if let Some(dir) = settings.get("series-dir") {
        for (index, outcome) in outcomes.iter().enumerate() {
            if let Ok((problem, record)) = &outcome.result {
                let name = format!(
                    "{index:03}_{}_{}.csv",
                    slug(&outcome.spec.method.id()),
                    outcome.spec.problem.id()
                );
                write_file(&Path::new(dir).join(name), &series_csv(problem, record))?;
            }
        }
    }
    emit(settings.get("summary"), &summary_csv(&outcomes))?;
    let failed = outcomes.iter().filter(|o| o.result.is_err()).count();
    if failed > 0 {
        for outcome in outcomes.iter().filter(|o| o.result.is_err()) {
            eprintln!(
                "{} h={}: {}",
                outcome.spec.method.id(),
                outcome.spec.h,
                outcome
                    .result
                    .as_ref()
                    .err()
                    .map(String::as_str)
                    .unwrap_or("")
            );
        }
        return Err(CliError::Partial {
            failed,
            total: outcomes.len(),
        });
    }
    Ok(())
}

fn convergence(args: ConvergenceArgs) -> CliResult<()> {
    let settings = args.experiment.settings(vec![
        ("metric", args.metric.clone()),
        ("out", args.out.clone()),
    ])?;
    let metric = ConvergenceMetric::parse(settings.get("metric"))?;
    let grid = Grid::from_settings(&settings)?;
    if grid.steps.len() < 2 {
        return Err(CliError::usage("convergence needs at least two step sizes"));
    }
    if grid.methods.len() != 1 {
        return Err(CliError::usage("convergence takes exactly one method"));
    }
    let specs = grid.expand();
    let mut runs = Vec::with_capacity(specs.len());
    for outcome in run_all(&specs)? {
        match outcome.result {
            Ok(run) => runs.push(run),
            Err(message) => {
                return Err(CliError::RunFailed(format!(
                    "h={}: {message}",
                    outcome.spec.h
                )))
            }
        }
    }
    let errors = convergence_errors(&specs, metric, &runs)?;
    let orders = observed_orders(&grid.steps, &errors)?;
    emit(
        settings.get("out"),
        &convergence_csv(&grid.steps, &errors, &orders),
    )
}
