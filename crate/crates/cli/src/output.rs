//! CSV serialization of series, summaries and convergence tables.
//!
//! Floating point values are written with 17 significant digits, enough to
//! round-trip every double. Undefined values are empty fields.

use std::fmt::Write as _;
use std::path::Path;

use hamint::{OdeProblem, RunRecord};

use crate::error::{CliError, CliResult};
use crate::experiment::Outcome;

pub const SUMMARY_HEADER: &str = "method,problem,param,h,steps,max_global_error,max_energy_error,wall_seconds,solver_iters,status";
pub const CONVERGENCE_HEADER: &str = "h,error,order";

fn float(v: f64) -> String {
    format!("{v:.16e}")
}

fn optional(v: Option<f64>) -> String {
    v.map(float).unwrap_or_default()
}

/// Quotes a field if it contains a separator, quote or newline.
fn field(text: &str) -> String {
    if text.contains([',', '"', '\n']) {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_string()
    }
}

/// Header of a series file for a state of `dimension` components laid out
/// as `(p_1..p_n, q_1..q_n)`.
pub fn series_header(dimension: usize) -> String {
    let n = dimension / 2;
    let mut header = String::from("t");
    for name in ["p", "q"] {
        for i in 1..=n {
            let _ = write!(header, ",{name}{i}");
        }
    }
    header.push_str(",e_g,e_e");
    header
}

/// Series CSV: one row per recorded sample; times in the problem's display
/// unit.
pub fn series_csv(problem: &OdeProblem, record: &RunRecord) -> String {
    let scale = problem.time_unit().scale;
    let mut out = series_header(problem.dimension());
    out.push('\n');
    for (i, (t, y)) in record.times.iter().zip(&record.states).enumerate() {
        out.push_str(&float(t / scale));
        for v in y {
            out.push(',');
            out.push_str(&float(*v));
        }
        let pick = |values: &Option<Vec<f64>>| optional(values.as_ref().map(|v| v[i]));
        let _ = writeln!(
            out,
            ",{},{}",
            pick(&record.global_errors),
            pick(&record.energy_errors)
        );
    }
    out
}

pub fn summary_row(outcome: &Outcome) -> String {
    let spec = &outcome.spec;
    let mut cells = vec![
        field(&spec.method.id()),
        spec.problem.id().to_string(),
        spec.problem.param(),
        float(spec.h),
    ];
    match (&outcome.result, outcome.summary()) {
        (Ok(_), Some(summary)) => cells.extend([
            summary.steps.to_string(),
            optional(summary.max_global_error),
            optional(summary.max_energy_error),
            format!("{:.6e}", summary.wall_seconds),
            summary.solver_iterations.to_string(),
            "ok".to_string(),
        ]),
        (result, _) => {
            let reason = result.as_ref().err().cloned().unwrap_or_default();
            cells.extend([
                outcome.planned_steps.to_string(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                field(&format!("failed: {reason}")),
            ]);
        }
    }
    cells.join(",")
}

pub fn summary_csv(outcomes: &[Outcome]) -> String {
    let mut out = format!("{SUMMARY_HEADER}\n");
    for outcome in outcomes {
        out.push_str(&summary_row(outcome));
        out.push('\n');
    }
    out
}

pub fn convergence_csv(steps: &[f64], errors: &[f64], orders: &[Option<f64>]) -> String {
    let mut out = format!("{CONVERGENCE_HEADER}\n");
    for (i, (h, e)) in steps.iter().zip(errors).enumerate() {
        let order = match i.checked_sub(1).map(|j| orders[j]) {
            None => String::new(),
            Some(Some(p)) => float(p),
            Some(None) => "indeterminate".to_string(),
        };
        let _ = writeln!(out, "{},{},{order}", float(*h), float(*e));
    }
    out
}

pub fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}
