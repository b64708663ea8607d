//! Stage equation solver shared by the implicit steppers.
//!
//! Every implicit stepper writes its stage equations as a fixed point
//! problem `x = G(x)` and hands `G` to [`solve_stage_fixed_point`]. The
//! default is plain fixed-point iteration; Newton with a finite-difference
//! Jacobian is available explicitly or as a fallback when the plain
//! iteration fails to contract.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMode {
    FixedPoint,
    Newton,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub max_iterations: usize,
    /// Stop when `|x_{k+1} - x_k|_inf <= tolerance * (1 + |x_{k+1}|_inf)`.
    pub tolerance: f64,
    pub mode: SolveMode,
    /// Retry a failed fixed-point solve with Newton from the same guess.
    pub newton_fallback: bool,
    /// After the tolerance is met, keep iterating while the successive
    /// difference still shrinks, up to the iteration cap.
    pub polish: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iterations: 50,
            tolerance: 1e-14,
            mode: SolveMode::FixedPoint,
            newton_fallback: true,
            polish: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be positive".into()));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::Config("solver tolerance must be positive".into()));
        }
        Ok(())
    }
}

/// Outcome of a converged stage solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    pub residual: f64,
}

fn max_norm(x: &[f64]) -> f64 {
    x.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

fn converged(step: f64, x: &[f64], tolerance: f64) -> bool {
    step <= tolerance * (1.0 + max_norm(x))
}

/// Solves `x = map(x)` starting from `x`, overwriting it with the fixed point.
///
/// `map(input, output)` must write `G(input)` into `output`. Never returns a
/// non-converged iterate: hitting the iteration cap or producing a
/// non-finite value yields [`Error::NonConvergence`].
pub fn solve_stage_fixed_point<G>(
    mut map: G,
    x: &mut [f64],
    config: &SolverConfig,
) -> Result<SolveReport>
where
    G: FnMut(&[f64], &mut [f64]),
{
    match config.mode {
        SolveMode::Newton => newton(&mut map, x, config),
        SolveMode::FixedPoint => {
            let guess = config.newton_fallback.then(|| x.to_vec());
            match picard(&mut map, x, config) {
                Ok(report) => Ok(report),
                Err(err) => match guess {
                    Some(guess) => {
                        x.copy_from_slice(&guess);
                        let mut report = newton(&mut map, x, config)?;
                        report.iterations += config.max_iterations;
                        Ok(report)
                    }
                    None => Err(err),
                },
            }
        }
    }
}

fn picard<G>(map: &mut G, x: &mut [f64], config: &SolverConfig) -> Result<SolveReport>
where
    G: FnMut(&[f64], &mut [f64]),
{
    let mut next = vec![0.0; x.len()];
    let mut residual = f64::INFINITY;
    let mut met: Option<usize> = None;
    for iteration in 1..=config.max_iterations {
        map(x, &mut next);
        let previous = residual;
        residual = x
            .iter()
            .zip(&next)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        if !residual.is_finite() {
            x.copy_from_slice(&next);
            return Err(Error::NonConvergence {
                iterations: iteration,
                residual,
            });
        }
        if met.is_some() && residual >= previous {
            // Stagnated at round-off: keep the iterate from before this map.
            return Ok(SolveReport {
                iterations: iteration,
                residual: previous,
            });
        }
        x.copy_from_slice(&next);
        if met.is_none() && converged(residual, x, config.tolerance) {
            met = Some(iteration);
        }
        if met.is_some() && (!config.polish || residual == 0.0) {
            return Ok(SolveReport {
                iterations: iteration,
                residual,
            });
        }
    }
    if met.is_some() {
        return Ok(SolveReport {
            iterations: config.max_iterations,
            residual,
        });
    }
    Err(Error::NonConvergence {
        iterations: config.max_iterations,
        residual,
    })
}

fn newton<G>(map: &mut G, x: &mut [f64], config: &SolverConfig) -> Result<SolveReport>
where
    G: FnMut(&[f64], &mut [f64]),
{
    let n = x.len();
    let mut gx = vec![0.0; n];
    let mut shifted = vec![0.0; n];
    let mut g_shifted = vec![0.0; n];
    let mut residual = f64::INFINITY;
    let mut met = false;
    for iteration in 1..=config.max_iterations {
        map(x, &mut gx);
        // Jacobian of R(x) = x - G(x) by forward differences.
        let mut jac = DMatrix::<f64>::identity(n, n);
        shifted.copy_from_slice(x);
        for j in 0..n {
            let delta = f64::EPSILON.sqrt() * x[j].abs().max(1.0);
            shifted[j] = x[j] + delta;
            map(&shifted, &mut g_shifted);
            shifted[j] = x[j];
            for i in 0..n {
                jac[(i, j)] -= (g_shifted[i] - gx[i]) / delta;
            }
        }
        let rhs = DVector::from_iterator(n, gx.iter().zip(x.iter()).map(|(g, v)| g - v));
        let Some(dx) = jac.lu().solve(&rhs) else {
            if met {
                return Ok(SolveReport {
                    iterations: iteration,
                    residual,
                });
            }
            return Err(Error::NonConvergence {
                iterations: iteration,
                residual,
            });
        };
        let previous = residual;
        residual = max_norm(dx.as_slice());
        if !residual.is_finite() {
            return Err(Error::NonConvergence {
                iterations: iteration,
                residual,
            });
        }
        if met && residual >= previous {
            // Stagnated at round-off: keep the current iterate.
            return Ok(SolveReport {
                iterations: iteration,
                residual: previous,
            });
        }
        for (v, d) in x.iter_mut().zip(dx.iter()) {
            *v += d;
        }
        if !met && converged(residual, x, config.tolerance) {
            met = true;
        }
        if met && (!config.polish || residual == 0.0) {
            return Ok(SolveReport {
                iterations: iteration,
                residual,
            });
        }
    }
    if met {
        return Ok(SolveReport {
            iterations: config.max_iterations,
            residual,
        });
    }
    Err(Error::NonConvergence {
        iterations: config.max_iterations,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plain() -> SolverConfig {
        SolverConfig {
            newton_fallback: false,
            polish: false,
            ..SolverConfig::default()
        }
    }

    #[test]
    fn identity_map_converges_immediately() {
        let mut x = vec![0.25, -3.0];
        let report =
            solve_stage_fixed_point(|u, out| out.copy_from_slice(u), &mut x, &plain()).unwrap();
        assert_eq!(report.iterations, 1);
        assert_eq!(x, vec![0.25, -3.0]);
    }

    #[test]
    fn affine_contraction_reaches_fixed_point() {
        let mut x = vec![0.0];
        let report =
            solve_stage_fixed_point(|u, out| out[0] = 0.5 * u[0] + 1.0, &mut x, &plain()).unwrap();
        assert!((x[0] - 2.0).abs() <= 1e-13);
        assert!(report.iterations > 1 && report.iterations <= 50);
    }

    #[test]
    fn divergent_map_is_rejected() {
        let mut x = vec![0.0];
        let err = solve_stage_fixed_point(|u, out| out[0] = 2.0 * u[0] + 1.0, &mut x, &plain())
            .unwrap_err();
        assert!(matches!(err, Error::NonConvergence { iterations: 50, .. }));
    }

    #[test]
    fn newton_solves_expanding_affine_map() {
        // Fixed point of 2u + 1 is -1 even though Picard iteration diverges.
        let config = SolverConfig {
            mode: SolveMode::Newton,
            ..SolverConfig::default()
        };
        let mut x = vec![0.0];
        solve_stage_fixed_point(|u, out| out[0] = 2.0 * u[0] + 1.0, &mut x, &config).unwrap();
        assert!((x[0] + 1.0).abs() < 1e-12);

        let mut y = vec![0.0];
        let report = solve_stage_fixed_point(
            |u, out| out[0] = 2.0 * u[0] + 1.0,
            &mut y,
            &SolverConfig::default(),
        )
        .unwrap();
        assert!((y[0] + 1.0).abs() < 1e-12);
        assert!(report.iterations > 50, "fallback iterations are counted");
    }

    #[test]
    fn newton_handles_nonlinear_system() {
        // x = cos(y), y = sin(x) / 2
        let config = SolverConfig {
            mode: SolveMode::Newton,
            ..SolverConfig::default()
        };
        let mut x = vec![1.0, 0.0];
        solve_stage_fixed_point(
            |u, out| {
                out[0] = u[1].cos();
                out[1] = 0.5 * u[0].sin();
            },
            &mut x,
            &config,
        )
        .unwrap();
        assert!((x[0] - x[1].cos()).abs() < 1e-13);
        assert!((x[1] - 0.5 * x[0].sin()).abs() < 1e-13);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut c = SolverConfig::default();
        assert!(c.validate().is_ok());
        c.tolerance = 0.0;
        assert!(c.validate().is_err());
        c = SolverConfig {
            max_iterations: 0,
            ..SolverConfig::default()
        };
        assert!(c.validate().is_err());
    }
}
