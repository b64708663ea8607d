//! Uniform stepping interface implemented by every integrator.

use crate::error::Result;
use crate::model::{OdeProblem, StateVector};

/// A fixed-step time integrator.
///
/// Steppers carry an input vector of `r` state-sized components between
/// steps. One-step methods use `r = 1`; general linear methods use `r >= 1`.
/// The first component is always the approximation of `y(t)`.
///
/// Instances hold per-run workspace and are not meant to be shared between
/// concurrent runs.
pub trait Stepper {
    fn label(&self) -> String;

    /// Builds the input vector for the first step from the initial state.
    fn start(&mut self, problem: &OdeProblem, _h: f64) -> Result<Vec<StateVector>> {
        Ok(vec![problem.y0().to_vec()])
    }

    /// Advances `inputs` in place from `t` to `t + h` and returns the number
    /// of stage solver iterations used.
    fn step(
        &mut self,
        problem: &OdeProblem,
        t: f64,
        inputs: &mut [StateVector],
        h: f64,
    ) -> Result<usize>;
}

impl<S: Stepper + ?Sized> Stepper for Box<S> {
    fn label(&self) -> String {
        (**self).label()
    }

    fn start(&mut self, problem: &OdeProblem, h: f64) -> Result<Vec<StateVector>> {
        (**self).start(problem, h)
    }

    fn step(
        &mut self,
        problem: &OdeProblem,
        t: f64,
        inputs: &mut [StateVector],
        h: f64,
    ) -> Result<usize> {
        (**self).step(problem, t, inputs, h)
    }
}

/// Compensated (Kahan) accumulation of step increments into a state.
///
/// Long runs add millions of small increments to an O(1) state; the carry
/// keeps the low-order bits each addition would otherwise discard, so the
/// round-off contribution to the global error grows far more slowly.
#[derive(Debug, Clone, Default)]
pub struct CompensatedSum {
    carry: Vec<f64>,
}

impl CompensatedSum {
    pub fn reset(&mut self, n: usize) {
        self.carry.clear();
        self.carry.resize(n, 0.0);
    }

    /// `y += increment`, carrying the rounding error to the next call.
    pub fn add(&mut self, y: &mut [f64], increment: &[f64]) {
        if self.carry.len() != y.len() {
            self.reset(y.len());
        }
        for ((v, c), dz) in y.iter_mut().zip(&mut self.carry).zip(increment) {
            let corrected = dz + *c;
            let sum = *v + corrected;
            *c = corrected - (sum - *v);
            *v = sum;
        }
    }
}
