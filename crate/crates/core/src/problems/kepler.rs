//! Planar Kepler problem with unit gravitational parameter and semi-major
//! axis, `H = |p|^2 / 2 - 1 / |q|`, started at pericenter.

use crate::error::{Error, Result};
use crate::model::{phase_state, OdeProblem, Separable, StateVector};

/// `2π` split into a double and its rounding remainder.
const TWO_PI_HI: f64 = std::f64::consts::TAU;
const TWO_PI_LO: f64 = 2.449_293_598_294_706_4e-16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeplerConfig {
    pub eccentricity: f64,
    pub periods: u32,
}

impl KeplerConfig {
    pub fn new(eccentricity: f64, periods: u32) -> Result<Self> {
        let c = Self {
            eccentricity,
            periods,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.eccentricity) {
            return Err(Error::Config(format!(
                "eccentricity must lie in [0, 1), got {}",
                self.eccentricity
            )));
        }
        if self.periods == 0 {
            return Err(Error::Config("period count must be positive".into()));
        }
        Ok(())
    }

    /// Integration length: `periods` orbits of period `2π`.
    pub fn end_time(&self) -> f64 {
        f64::from(self.periods) * 2.0 * std::f64::consts::PI
    }
}

/// Reduces `t` to the mean anomaly in `[0, 2π)` using a two-term `2π`.
pub fn mean_anomaly(t: f64) -> f64 {
    let k = (t / TWO_PI_HI).floor();
    let mut m = (t - k * TWO_PI_HI) - k * TWO_PI_LO;
    if m < 0.0 {
        m += TWO_PI_HI;
    } else if m >= TWO_PI_HI {
        m -= TWO_PI_HI;
    }
    m
}

/// Solves Kepler's equation `E - e sin E = m` for the eccentric anomaly.
///
/// Newton iteration from `E = m`, safeguarded by the bracket
/// `[m - e, m + e]` and falling back to bisection whenever a Newton step
/// leaves the bracket or fails to reduce the residual.
pub fn eccentric_anomaly(e: f64, m: f64) -> Result<f64> {
    let g = |x: f64| x - e * x.sin() - m;
    let (mut lo, mut hi) = (m - e, m + e);
    let mut x = m;
    let mut gx = g(x);
    for _ in 0..200 {
        if gx == 0.0 {
            return Ok(x);
        }
        if gx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - gx / (1.0 - e * x.cos());
        let mut next = newton;
        let mut g_next = f64::NAN;
        if newton > lo && newton < hi {
            g_next = g(newton);
        }
        if !(g_next.abs() < gx.abs()) {
            next = 0.5 * (lo + hi);
            g_next = g(next);
        }
        let step = (next - x).abs();
        x = next;
        gx = g_next;
        if step <= 1e-15 * x.abs().max(1.0) || hi - lo <= 1e-15 * x.abs().max(1.0) {
            return Ok(x);
        }
    }
    Err(Error::NonConvergence {
        iterations: 200,
        residual: gx.abs(),
    })
}

/// Exact `(p, q)` of the orbit started at pericenter with eccentricity `e`.
pub fn kepler_exact(e: f64, t: f64) -> Result<StateVector> {
    if !(0.0..1.0).contains(&e) {
        return Err(Error::Config(format!("eccentricity {e} outside [0, 1)")));
    }
    let anomaly = eccentric_anomaly(e, mean_anomaly(t))?;
    let (s, c) = anomaly.sin_cos();
    let root = (1.0 - e * e).sqrt();
    let denom = 1.0 - e * c;
    Ok(vec![-s / denom, root * c / denom, c - e, root * s])
}

/// Kepler problem with `y0 = (p, q) = (0, sqrt((1+e)/(1-e)), 1-e, 0)`.
pub fn make_kepler(config: &KeplerConfig) -> Result<OdeProblem> {
    config.validate()?;
    let e = config.eccentricity;
    let y0 = phase_state(&[0.0, ((1.0 + e) / (1.0 - e)).sqrt()], &[1.0 - e, 0.0]);
    Ok(OdeProblem::new(format!("kepler-e{e}"), y0, |_, y, out| {
        let r2 = y[2] * y[2] + y[3] * y[3];
        let inv_r3 = 1.0 / (r2 * r2.sqrt());
        out[0] = -y[2] * inv_r3;
        out[1] = -y[3] * inv_r3;
        out[2] = y[0];
        out[3] = y[1];
    })
    .with_hamiltonian(|y| {
        0.5 * (y[0] * y[0] + y[1] * y[1]) - 1.0 / (y[2] * y[2] + y[3] * y[3]).sqrt()
    })
    .with_exact(move |t| kepler_exact(e, t).expect("Kepler's equation is solvable for e < 1"))
    .with_separable(Separable::new(
        |p, out| out.copy_from_slice(p),
        |q, out| {
            let r = q[0].hypot(q[1]);
            let inv_r3 = 1.0 / (r * r * r);
            out[0] = q[0] * inv_r3;
            out[1] = q[1] * inv_r3;
        },
    )))
}

/// Angular momentum `q1 p2 - q2 p1`.
pub fn angular_momentum(y: &[f64]) -> f64 {
    y[2] * y[1] - y[3] * y[0]
}
