//! Fixed-step integration driver producing [`RunRecord`]s.

use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::model::{OdeProblem, RunRecord};
use crate::stepper::Stepper;

/// Upper bound on stored samples when no stride is given.
pub const DEFAULT_MAX_SAMPLES: usize = 1_000_000;

/// Which steps are recorded. The initial state and the final step are
/// always recorded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Sampling {
    /// Every step up to [`DEFAULT_MAX_SAMPLES`], decimated beyond that.
    #[default]
    Auto,
    /// Every `n`-th step.
    Stride(usize),
}

impl Sampling {
    pub fn stride(self, steps: usize) -> usize {
        match self {
            Sampling::Auto => steps.div_ceil(DEFAULT_MAX_SAMPLES).max(1),
            Sampling::Stride(n) => n.max(1),
        }
    }
}

/// Number of uniform steps of size `h` needed to reach `duration`.
pub fn step_count(duration: f64, h: f64) -> Result<usize> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Config(format!(
            "step size must be positive, got {h}"
        )));
    }
    if !(duration >= 0.0 && duration.is_finite()) {
        return Err(Error::Config(format!(
            "duration must be non-negative, got {duration}"
        )));
    }
    let ratio = duration / h;
    let nearest = ratio.round();
    let steps = if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest
    } else {
        ratio.ceil()
    };
    Ok(steps as usize)
}

/// Integrates `problem` over `steps` uniform steps of size `h`.
///
/// Wall-clock time covers the start procedure and the steps only; error
/// evaluation and recording are excluded.
pub fn integrate<S: Stepper + ?Sized>(
    problem: &OdeProblem,
    stepper: &mut S,
    h: f64,
    steps: usize,
    sampling: Sampling,
) -> Result<RunRecord> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Config(format!(
            "step size must be positive, got {h}"
        )));
    }
    let stride = sampling.stride(steps);
    let t0 = problem.t0();
    let e0 = problem.hamiltonian(problem.y0());
    let absolute_energy = e0 == Some(0.0);

    let capacity = steps / stride + 2;
    let mut record = RunRecord {
        method: stepper.label(),
        problem: problem.name().to_string(),
        h,
        times: Vec::with_capacity(capacity),
        states: Vec::with_capacity(capacity),
        global_errors: problem.has_exact().then(|| Vec::with_capacity(capacity)),
        energy_errors: e0.map(|_| Vec::with_capacity(capacity)),
        energy_errors_absolute: absolute_energy,
        wall_seconds: 0.0,
        steps,
        solver_iterations: 0,
    };

    let mut elapsed = Duration::ZERO;
    let clock = Instant::now();
    let mut inputs = stepper.start(problem, h)?;
    elapsed += clock.elapsed();

    let push = |record: &mut RunRecord, t: f64, y: &[f64]| -> Result<()> {
        record.times.push(t);
        record.states.push(y.to_vec());
        if let Some(errors) = record.global_errors.as_mut() {
            errors.push(problem.global_error(t, y)?);
        }
        if let (Some(errors), Some(e0)) = (record.energy_errors.as_mut(), e0) {
            let value = match problem.energy_error(y, e0) {
                Ok(v) => v,
                Err(Error::ZeroReferenceEnergy { absolute }) => absolute,
                Err(err) => return Err(err),
            };
            errors.push(value);
        }
        Ok(())
    };
    push(&mut record, t0, &inputs[0])?;

    for n in 0..steps {
        let t = t0 + n as f64 * h;
        let clock = Instant::now();
        let iterations = stepper
            .step(problem, t, &mut inputs, h)
            .map_err(|err| match err {
                Error::NonConvergence {
                    iterations,
                    residual,
                } => Error::StepFailure {
                    step: n + 1,
                    t,
                    iterations,
                    residual,
                },
                other => other,
            })?;
        elapsed += clock.elapsed();
        record.solver_iterations += iterations;
        if inputs[0].iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { step: n + 1 });
        }
        let done = n + 1;
        if done % stride == 0 || done == steps {
            push(&mut record, t0 + done as f64 * h, &inputs[0])?;
        }
    }
    record.wall_seconds = elapsed.as_secs_f64();
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cgp::Cgp2;
    use crate::problems::make_sho;
    use crate::solver::SolverConfig;

    #[test]
    fn step_counts() {
        assert_eq!(step_count(1000.0, 0.05).unwrap(), 20_000);
        assert_eq!(step_count(0.0, 0.05).unwrap(), 0);
        assert_eq!(step_count(1.0, 0.3).unwrap(), 4);
        let tau = 2.0 * std::f64::consts::PI;
        assert_eq!(step_count(100.0 * tau, tau / 1600.0).unwrap(), 160_000);
        assert!(step_count(1.0, 0.0).is_err());
        assert!(step_count(-1.0, 0.1).is_err());
    }

    #[test]
    fn zero_steps_record_only_the_initial_sample() {
        let sho = make_sho();
        let rec = integrate(
            &sho,
            &mut Cgp2::new(SolverConfig::default()),
            0.05,
            0,
            Sampling::Auto,
        )
        .unwrap();
        assert_eq!(rec.times, vec![0.0]);
        assert_eq!(rec.states, vec![vec![0.0, 1.0]]);
        assert_eq!(rec.global_errors, Some(vec![0.0]));
        assert_eq!(rec.energy_errors, Some(vec![0.0]));
    }

    #[test]
    fn stride_keeps_first_and_last_samples() {
        let sho = make_sho();
        let mut stepper = Cgp2::new(SolverConfig::default());
        let rec = integrate(&sho, &mut stepper, 0.1, 25, Sampling::Stride(10)).unwrap();
        assert_eq!(rec.times.len(), 4);
        assert!((rec.times[3] - 2.5).abs() < 1e-15);
        assert!(rec.times.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(rec.steps, 25);
        assert!(rec.solver_iterations >= 25);
    }

    #[test]
    fn zero_reference_energy_falls_back_to_absolute() {
        let sho = crate::problems::make_sho_from(0.0, 0.0);
        let rec = integrate(
            &sho,
            &mut Cgp2::new(SolverConfig::default()),
            0.1,
            3,
            Sampling::Auto,
        )
        .unwrap();
        assert!(rec.energy_errors_absolute);
        assert_eq!(rec.energy_errors, Some(vec![0.0; 4]));
    }
}
