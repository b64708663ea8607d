//! Error series, long-time growth exponents and run summaries.

use crate::error::{Error, Result};
use crate::model::RunRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    /// `E_g(t) = |y(t) - y_exact(t)|_2`.
    Global,
    /// `|E_e(t)| = |H(y(t)) - H(y0)| / |H(y0)|`.
    Energy,
}

/// Per-sample error values together with their running maximum.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorSeries {
    pub metric: Metric,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub envelope: Vec<f64>,
}

/// Running maximum of `values`.
pub fn envelope(values: &[f64]) -> Vec<f64> {
    values
        .iter()
        .scan(f64::NEG_INFINITY, |max, &v| {
            *max = max.max(v);
            Some(*max)
        })
        .collect()
}

pub fn compute_error_series(record: &RunRecord, metric: Metric) -> Result<ErrorSeries> {
    let values: Vec<f64> = match metric {
        Metric::Global => record
            .global_errors
            .clone()
            .ok_or(Error::UnsupportedMetric("run has no exact solution"))?,
        Metric::Energy => record
            .energy_errors
            .as_ref()
            .ok_or(Error::UnsupportedMetric("run has no Hamiltonian"))?
            .iter()
            .map(|v| v.abs())
            .collect(),
    };
    Ok(ErrorSeries {
        metric,
        times: record.times.clone(),
        envelope: envelope(&values),
        values,
    })
}

/// Least-squares power law `envelope ≈ exp(intercept) t^exponent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthFit {
    pub exponent: f64,
    /// Natural logarithm of the prefactor.
    pub intercept: f64,
    pub window: (f64, f64),
    /// Root mean square of the log-space residuals.
    pub residual: f64,
    pub points: usize,
}

/// Fits the slope of `log(envelope)` against `log(t)` over `window`.
///
/// The default window covers the last two decades of the sampled times.
/// Samples with `t <= 0` or a zero envelope are skipped.
pub fn fit_growth_exponent(series: &ErrorSeries, window: Option<(f64, f64)>) -> Result<GrowthFit> {
    let t_end = series.times.last().copied().unwrap_or(0.0);
    let (lo, hi) = window.unwrap_or((t_end / 100.0, t_end));
    if !(lo < hi) {
        return Err(Error::Fit(format!("empty window [{lo}, {hi}]")));
    }
    let points: Vec<(f64, f64)> = series
        .times
        .iter()
        .zip(&series.envelope)
        .filter(|(t, e)| **t > 0.0 && **t >= lo && **t <= hi && **e > 0.0)
        .map(|(t, e)| (t.ln(), e.ln()))
        .collect();
    if points.len() < 10 {
        return Err(Error::Fit(format!(
            "need at least 10 positive samples in [{lo}, {hi}], found {}",
            points.len()
        )));
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("window spans a single time".into()));
    }
    let exponent = sxy / sxx;
    let intercept = mean_y - exponent * mean_x;
    let residual = (points
        .iter()
        .map(|p| (p.1 - intercept - exponent * p.0).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(GrowthFit {
        exponent,
        intercept,
        window: (lo, hi),
        residual,
        points: points.len(),
    })
}

/// One row of a results table.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub method: String,
    pub problem: String,
    pub h: f64,
    pub steps: usize,
    pub max_global_error: Option<f64>,
    pub max_energy_error: Option<f64>,
    pub wall_seconds: f64,
    pub solver_iterations: usize,
}

pub fn summarize_run(record: &RunRecord) -> Summary {
    let max_of = |metric| {
        compute_error_series(record, metric)
            .ok()
            .and_then(|s| s.envelope.last().copied())
    };
    Summary {
        method: record.method.clone(),
        problem: record.problem.clone(),
        h: record.h,
        steps: record.steps,
        max_global_error: max_of(Metric::Global),
        max_energy_error: max_of(Metric::Energy),
        wall_seconds: record.wall_seconds,
        solver_iterations: record.solver_iterations,
    }
}

/// Pairwise observed orders `log(e_i / e_{i+1}) / log(h_i / h_{i+1})`.
///
/// A pair involving a non-positive or non-finite error is indeterminate.
pub fn observed_orders(steps: &[f64], errors: &[f64]) -> Result<Vec<Option<f64>>> {
    if steps.len() != errors.len() {
        return Err(Error::Config(
            "step and error lists differ in length".into(),
        ));
    }
    if steps.len() < 2 {
        return Err(Error::Config("need at least two step sizes".into()));
    }
    Ok(steps
        .windows(2)
        .zip(errors.windows(2))
        .map(|(h, e)| {
            let usable = e.iter().all(|v| *v > 0.0 && v.is_finite());
            usable.then(|| (e[0] / e[1]).ln() / (h[0] / h[1]).ln())
        })
        .collect())
}
