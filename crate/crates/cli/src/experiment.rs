//! Experiment specifications and their execution.

use std::path::PathBuf;

use hamint::analysis::{compute_error_series, summarize_run, Metric, Summary};
use hamint::cgp::{Cgp1, Cgp2, CgpK};
use hamint::glm::{load_glm_tableau, Glm, GlmTableau};
use hamint::integrate::{integrate, step_count, Sampling};
use hamint::irk::Irk;
use hamint::problems::{make_argon7, make_kepler, make_sho, ArgonConfig, KeplerConfig};
use hamint::{OdeProblem, RunRecord, SolveMode, SolverConfig, Stepper};

use crate::config::Settings;
use crate::error::{CliError, CliResult};
use crate::literal::{parse_literal, parse_literal_list};

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSpec {
    Sho,
    Kepler {
        eccentricity: f64,
    },
    /// Argon cluster, optionally with initial conditions from a data file.
    Argon {
        data: Option<PathBuf>,
    },
}

impl ProblemSpec {
    pub fn id(&self) -> &'static str {
        match self {
            ProblemSpec::Sho => "sho",
            ProblemSpec::Kepler { .. } => "kepler",
            ProblemSpec::Argon { .. } => "argon",
        }
    }

    /// Problem parameter shown in the summary table (the eccentricity).
    pub fn param(&self) -> String {
        match self {
            ProblemSpec::Kepler { eccentricity } => format!("{eccentricity}"),
            _ => String::new(),
        }
    }

    pub fn build(&self) -> CliResult<OdeProblem> {
        let problem = match self {
            ProblemSpec::Sho => make_sho(),
            ProblemSpec::Kepler { eccentricity } => {
                let config = KeplerConfig::new(*eccentricity, 1).map_err(usage)?;
                make_kepler(&config).map_err(usage)?
            }
            ProblemSpec::Argon { data } => {
                let config = match data {
                    None => ArgonConfig::default(),
                    Some(path) => {
                        let text = std::fs::read_to_string(path).map_err(|e| {
                            CliError::usage(format!("cannot read {}: {e}", path.display()))
                        })?;
                        ArgonConfig::from_data(&text).map_err(usage)?
                    }
                };
                make_argon7(&config).map_err(usage)?
            }
        };
        Ok(problem)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MethodSpec {
    Cgp(usize),
    Irk4,
    /// `glm:euler`, `glm:gauss2` or `glm:<tableau file>`.
    Glm(String),
}

impl MethodSpec {
    pub fn parse(text: &str) -> CliResult<Self> {
        match text.trim() {
            "cgp1" => Ok(MethodSpec::Cgp(1)),
            "cgp2" => Ok(MethodSpec::Cgp(2)),
            "cgp3" => Ok(MethodSpec::Cgp(3)),
            "irk4" => Ok(MethodSpec::Irk4),
            other => match other.strip_prefix("glm:") {
                Some(source) if !source.is_empty() => Ok(MethodSpec::Glm(source.to_string())),
                _ => Err(CliError::usage(format!(
                    "unknown method `{other}` (expected cgp1, cgp2, cgp3, irk4 or glm:<file|euler|gauss2>)"
                ))),
            },
        }
    }

    pub fn id(&self) -> String {
        match self {
            MethodSpec::Cgp(k) => format!("cgp{k}"),
            MethodSpec::Irk4 => "irk4".into(),
            MethodSpec::Glm(source) => format!("glm:{source}"),
        }
    }

    fn tableau(source: &str) -> CliResult<GlmTableau> {
        match source {
            "euler" => Ok(GlmTableau::euler()),
            "gauss2" => Ok(GlmTableau::gauss2()),
            path => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::usage(format!("cannot read tableau {path}: {e}")))?;
                load_glm_tableau(&text).map_err(|e| CliError::usage(format!("tableau {path}: {e}")))
            }
        }
    }

    /// Loads any input files the method needs, so bad files surface as
    /// usage errors before integration starts.
    pub fn check(&self) -> CliResult<()> {
        if let MethodSpec::Glm(source) = self {
            Self::tableau(source)?;
        }
        Ok(())
    }

    pub fn build(&self, solver: SolverConfig) -> CliResult<Box<dyn Stepper>> {
        let stepper: Box<dyn Stepper> = match self {
            MethodSpec::Cgp(1) => Box::new(Cgp1::new(solver)),
            MethodSpec::Cgp(2) => Box::new(Cgp2::new(solver)),
            MethodSpec::Cgp(k) => Box::new(CgpK::new(*k, solver).map_err(usage)?),
            MethodSpec::Irk4 => Box::new(Irk::gauss2(solver)),
            MethodSpec::Glm(source) => Box::new(
                Glm::new(Self::tableau(source)?, solver)
                    .map_err(usage)?
                    .with_label(self.id()),
            ),
        };
        Ok(stepper)
    }
}

fn usage(err: hamint::Error) -> CliError {
    CliError::usage(err.to_string())
}

/// One integration: problem, method, step size and length.
///
/// `h` and `duration` are in the problem's display time unit (femtoseconds
/// for the argon cluster, the natural unit otherwise).
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub problem: ProblemSpec,
    pub method: MethodSpec,
    pub h: f64,
    pub duration: f64,
    pub sampling: Sampling,
    pub solver: SolverConfig,
}

/// Settings keys shared by every subcommand.
pub const EXPERIMENT_KEYS: &[&str] = &[
    "problem",
    "e",
    "argon-data",
    "method",
    "h",
    "tend",
    "periods",
    "stride",
    "solver",
    "max-iter",
    "tol",
    "newton-fallback",
];

fn parse_problem(settings: &Settings) -> CliResult<ProblemSpec> {
    let problem = match settings.require("problem")? {
        "sho" => ProblemSpec::Sho,
        "kepler" => {
            let e = settings
                .get("e")
                .map(parse_literal)
                .transpose()
                .map_err(CliError::Usage)?;
            let eccentricity =
                e.ok_or_else(|| CliError::usage("kepler needs an eccentricity (--e)"))?;
            KeplerConfig::new(eccentricity, 1).map_err(usage)?;
            ProblemSpec::Kepler { eccentricity }
        }
        "argon" => ProblemSpec::Argon {
            data: settings.get("argon-data").map(PathBuf::from),
        },
        other => {
            return Err(CliError::usage(format!(
                "unknown problem `{other}` (expected sho, kepler or argon)"
            )))
        }
    };
    if settings.get("e").is_some() && !matches!(problem, ProblemSpec::Kepler { .. }) {
        return Err(CliError::usage("--e only applies to kepler"));
    }
    Ok(problem)
}

fn parse_duration(settings: &Settings, problem: &ProblemSpec) -> CliResult<f64> {
    match (settings.get("tend"), settings.get("periods")) {
        (Some(_), Some(_)) => Err(CliError::usage("give either --tend or --periods, not both")),
        (None, None) => Err(CliError::usage("missing end time (--tend or --periods)")),
        (Some(tend), None) => {
            let tend = parse_literal(tend).map_err(CliError::Usage)?;
            if tend < 0.0 {
                return Err(CliError::usage(format!(
                    "end time must be non-negative, got {tend}"
                )));
            }
            Ok(tend)
        }
        (None, Some(periods)) => {
            if !matches!(problem, ProblemSpec::Kepler { .. }) {
                return Err(CliError::usage("--periods only applies to kepler"));
            }
            let n: u32 = periods
                .parse()
                .map_err(|_| CliError::usage(format!("invalid period count `{periods}`")))?;
            // n orbits of period 2π, evaluated as one correctly rounded literal.
            parse_literal(&format!("{}pi", 2 * u64::from(n))).map_err(CliError::Usage)
        }
    }
}

fn parse_solver(settings: &Settings) -> CliResult<SolverConfig> {
    let mut solver = SolverConfig::default();
    match settings.get("solver") {
        None | Some("fixed") => {}
        Some("newton") => solver.mode = SolveMode::Newton,
        Some(other) => {
            return Err(CliError::usage(format!(
                "unknown solver `{other}` (expected fixed or newton)"
            )))
        }
    }
    if let Some(n) = settings.parse("max-iter")? {
        solver.max_iterations = n;
    }
    if let Some(tol) = settings.get("tol") {
        solver.tolerance = parse_literal(tol).map_err(CliError::Usage)?;
    }
    if let Some(fallback) = settings.parse("newton-fallback")? {
        solver.newton_fallback = fallback;
    }
    solver.validate().map_err(usage)?;
    Ok(solver)
}

fn parse_sampling(settings: &Settings) -> CliResult<Sampling> {
    match settings.parse::<usize>("stride")? {
        None => Ok(Sampling::Auto),
        Some(0) => Err(CliError::usage("stride must be positive")),
        Some(n) => Ok(Sampling::Stride(n)),
    }
}

/// An experiment template plus the step sizes and methods to combine with it.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub template: ExperimentSpec,
    pub steps: Vec<f64>,
    pub methods: Vec<MethodSpec>,
}

impl Grid {
    /// Reads a grid from settings; `h` and `method` may be comma lists.
    pub fn from_settings(settings: &Settings) -> CliResult<Self> {
        let problem = parse_problem(settings)?;
        let duration = parse_duration(settings, &problem)?;
        let steps = parse_literal_list(settings.require("h")?).map_err(CliError::Usage)?;
        if steps.is_empty() {
            return Err(CliError::usage("empty step size list"));
        }
        if let Some(h) = steps.iter().find(|h| **h <= 0.0) {
            return Err(CliError::usage(format!(
                "step size must be positive, got {h}"
            )));
        }
        let methods = settings
            .require("method")?
            .split(',')
            .map(str::trim)
            .filter(|m| !m.is_empty())
            .map(MethodSpec::parse)
            .collect::<CliResult<Vec<_>>>()?;
        if methods.is_empty() {
            return Err(CliError::usage("empty method list"));
        }
        for method in &methods {
            method.check()?;
        }
        problem.build()?;
        let template = ExperimentSpec {
            problem,
            method: methods[0].clone(),
            h: steps[0],
            duration,
            sampling: parse_sampling(settings)?,
            solver: parse_solver(settings)?,
        };
        Ok(Self {
            template,
            steps,
            methods,
        })
    }

    /// Every (method, h) combination, method-major.
    pub fn expand(&self) -> Vec<ExperimentSpec> {
        self.methods
            .iter()
            .flat_map(|method| {
                self.steps.iter().map(move |&h| ExperimentSpec {
                    method: method.clone(),
                    h,
                    ..self.template.clone()
                })
            })
            .collect()
    }

    /// The single experiment of a grid with one step size and one method.
    pub fn single(self) -> CliResult<ExperimentSpec> {
        if self.steps.len() != 1 || self.methods.len() != 1 {
            return Err(CliError::usage(
                "run takes exactly one step size and one method",
            ));
        }
        Ok(self.template)
    }
}

/// Result of one experiment, successful or not.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub spec: ExperimentSpec,
    pub planned_steps: usize,
    pub result: Result<(OdeProblem, RunRecord), String>,
}

impl ExperimentSpec {
    /// Step size and duration in the problem's internal time unit.
    pub fn internal(&self, problem: &OdeProblem) -> (f64, f64) {
        let scale = problem.time_unit().scale;
        (self.h * scale, self.duration * scale)
    }

    pub fn steps(&self) -> CliResult<usize> {
        step_count(self.duration, self.h).map_err(usage)
    }

    pub fn execute(&self) -> CliResult<(OdeProblem, RunRecord)> {
        let problem = self.problem.build()?;
        let mut stepper = self.method.build(self.solver)?;
        let (h, _) = self.internal(&problem);
        let record = integrate(&problem, &mut stepper, h, self.steps()?, self.sampling)?;
        Ok((problem, record))
    }

    pub fn outcome(&self) -> Outcome {
        Outcome {
            spec: self.clone(),
            planned_steps: self.steps().unwrap_or(0),
            result: self.execute().map_err(|e| e.to_string()),
        }
    }
}

impl Outcome {
    pub fn summary(&self) -> Option<Summary> {
        self.result
            .as_ref()
            .ok()
            .map(|(_, record)| summarize_run(record))
    }
}

/// Error metric used by the convergence study.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvergenceMetric {
    /// Global error: max `E_g` against the exact solution, or the final-time
    /// distance to a fine reference run when no exact solution exists.
    Global,
    /// Max `|E_e|`.
    Energy,
}

impl ConvergenceMetric {
    pub fn parse(text: Option<&str>) -> CliResult<Self> {
        match text {
            None | Some("global") => Ok(Self::Global),
            Some("energy") => Ok(Self::Energy),
            Some(other) => Err(CliError::usage(format!(
                "unknown metric `{other}` (expected global or energy)"
            ))),
        }
    }
}

/// Divisor applied to the smallest step size for reference runs.
pub const REFERENCE_REFINEMENT: f64 = 10.0;

/// Error of each run in `specs` under `metric`, in order.
pub fn convergence_errors(
    specs: &[ExperimentSpec],
    metric: ConvergenceMetric,
    runs: &[(OdeProblem, RunRecord)],
) -> CliResult<Vec<f64>> {
    let (problem, _) = &runs[0];
    match metric {
        ConvergenceMetric::Energy => runs
            .iter()
            .map(|(_, r)| max_abs(r, Metric::Energy))
            .collect(),
        ConvergenceMetric::Global if problem.has_exact() => runs
            .iter()
            .map(|(_, r)| max_abs(r, Metric::Global))
            .collect(),
        ConvergenceMetric::Global => {
            let h_min = specs.iter().map(|s| s.h).fold(f64::INFINITY, f64::min);
            let reference = ExperimentSpec {
                method: MethodSpec::Cgp(2),
                h: h_min / REFERENCE_REFINEMENT,
                sampling: Sampling::Stride(usize::MAX),
                ..specs[0].clone()
            };
            let (_, reference) = reference.execute()?;
            let scale = problem.time_unit().scale;
            runs.iter()
                .zip(specs)
                .map(|((_, r), spec)| final_distance(&reference, r, spec.h, scale))
                .collect()
        }
    }
}

fn max_abs(record: &RunRecord, metric: Metric) -> CliResult<f64> {
    let series = compute_error_series(record, metric).map_err(usage)?;
    Ok(series.envelope.last().copied().unwrap_or(0.0))
}

/// Euclidean distance between the final states of two runs that end at the
/// same time. `h` and `scale` only serve the error message.
fn final_distance(reference: &RunRecord, run: &RunRecord, h: f64, scale: f64) -> CliResult<f64> {
    let (Some(t_ref), Some(t)) = (reference.times.last(), run.times.last()) else {
        return Err(CliError::usage("empty run"));
    };
    if (t_ref - t).abs() > 1e-9 * t_ref.abs().max(1.0) {
        return Err(CliError::usage(format!(
            "run with h = {h} ends at {} but the reference run ends at {}; \
             every step size and step size / {REFERENCE_REFINEMENT} must divide the end time",
            t / scale,
            t_ref / scale
        )));
    }
    let a = reference
        .states
        .last()
        .expect("times and states have equal length");
    let b = run
        .states
        .last()
        .expect("times and states have equal length");
    Ok(a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt())
}
