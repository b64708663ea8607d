//! Problem and trajectory types shared by every integrator.
//!
//! States of Hamiltonian problems are laid out momenta first: `y = (p, q)`
//! with `p = y[..n]` and `q = y[n..]`. Constructors of the shipped problems
//! follow this convention; generic problems (for instance scalar test
//! equations) may use any layout but then have no split right-hand side.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

pub type StateVector = Vec<f64>;

type RhsFn = dyn Fn(f64, &[f64], &mut [f64]) + Send + Sync;
type GradientFn = dyn Fn(&[f64], &mut [f64]) + Send + Sync;
type EnergyFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type ExactFn = dyn Fn(f64) -> StateVector + Send + Sync;

/// Builds a `(p, q)` state from separate momentum and position blocks.
pub fn phase_state(p: &[f64], q: &[f64]) -> StateVector {
    assert_eq!(
        p.len(),
        q.len(),
        "momentum and position blocks differ in length"
    );
    p.iter().chain(q).copied().collect()
}

/// Splits a `(p, q)` state into its momentum and position halves.
pub fn split_phase(y: &[f64]) -> (&[f64], &[f64]) {
    y.split_at(y.len() / 2)
}

/// Gradients of a separable Hamiltonian `H(p, q) = T(p) + V(q)`.
#[derive(Clone)]
pub struct Separable {
    kinetic_gradient: Arc<GradientFn>,
    potential_gradient: Arc<GradientFn>,
}

impl Separable {
    /// `kinetic` writes `∇_p T(p)`, `potential` writes `∇_q V(q)`.
    pub fn new<K, P>(kinetic: K, potential: P) -> Self
    where
        K: Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
        P: Fn(&[f64], &mut [f64]) + Send + Sync + 'static,
    {
        Self {
            kinetic_gradient: Arc::new(kinetic),
            potential_gradient: Arc::new(potential),
        }
    }
}

/// Unit in which a problem's times are presented to users.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeUnit {
    pub label: &'static str,
    /// Internal time units per display unit.
    pub scale: f64,
}

impl Default for TimeUnit {
    fn default() -> Self {
        Self {
            label: "",
            scale: 1.0,
        }
    }
}

/// An initial value problem `y' = f(t, y)`, `y(t0) = y0`, with optional
/// Hamiltonian, exact solution and separable splitting.
///
/// Immutable after construction; clones share the underlying closures.
#[derive(Clone)]
pub struct OdeProblem {
    name: String,
    t0: f64,
    y0: StateVector,
    rhs: Arc<RhsFn>,
    separable: Option<Separable>,
    hamiltonian: Option<Arc<EnergyFn>>,
    exact: Option<Arc<ExactFn>>,
    time_unit: TimeUnit,
}

impl fmt::Debug for OdeProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OdeProblem")
            .field("name", &self.name)
            .field("dimension", &self.dimension())
            .field("t0", &self.t0)
            .field("y0", &self.y0)
            .field("separable", &self.separable.is_some())
            .field("hamiltonian", &self.hamiltonian.is_some())
            .field("exact", &self.exact.is_some())
            .finish()
    }
}

impl OdeProblem {
    pub fn new<F>(name: impl Into<String>, y0: StateVector, rhs: F) -> Self
    where
        F: Fn(f64, &[f64], &mut [f64]) + Send + Sync + 'static,
    {
        assert!(!y0.is_empty(), "problem dimension must be positive");
        Self {
            name: name.into(),
            t0: 0.0,
            y0,
            rhs: Arc::new(rhs),
            separable: None,
            hamiltonian: None,
            exact: None,
            time_unit: TimeUnit::default(),
        }
    }

    pub fn with_t0(mut self, t0: f64) -> Self {
        self.t0 = t0;
        self
    }

    pub fn with_hamiltonian<H>(mut self, h: H) -> Self
    where
        H: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        self.hamiltonian = Some(Arc::new(h));
        self
    }

    pub fn with_exact<E>(mut self, exact: E) -> Self
    where
        E: Fn(f64) -> StateVector + Send + Sync + 'static,
    {
        self.exact = Some(Arc::new(exact));
        self
    }

    /// Attaches a separable splitting. Requires an even dimension since the
    /// state is `(p, q)`.
    pub fn with_separable(mut self, separable: Separable) -> Self {
        assert!(
            self.y0.len().is_multiple_of(2),
            "separable problems need a (p, q) state"
        );
        self.separable = Some(separable);
        self
    }

    pub fn with_time_unit(mut self, unit: TimeUnit) -> Self {
        self.time_unit = unit;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dimension(&self) -> usize {
        self.y0.len()
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn y0(&self) -> &[f64] {
        &self.y0
    }

    pub fn time_unit(&self) -> TimeUnit {
        self.time_unit
    }

    pub fn has_hamiltonian(&self) -> bool {
        self.hamiltonian.is_some()
    }

    pub fn has_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn is_separable(&self) -> bool {
        self.separable.is_some()
    }

    /// Unchecked right-hand side evaluation used on the hot path of the
    /// steppers. `y` and `out` must both have length `dimension()`.
    #[inline]
    pub fn rhs_into(&self, t: f64, y: &[f64], out: &mut [f64]) {
        debug_assert_eq!(y.len(), self.dimension());
        debug_assert_eq!(out.len(), self.dimension());
        (self.rhs)(t, y, out)
    }

    /// Checked right-hand side evaluation.
    pub fn rhs(&self, t: f64, y: &[f64]) -> Result<StateVector> {
        self.check_dimension(y)?;
        let mut out = vec![0.0; y.len()];
        self.rhs_into(t, y, &mut out);
        Ok(out)
    }

    /// Evaluates the right-hand side through the separable splitting,
    /// `(p', q') = (-∇_q V(q), ∇_p T(p))`, or through the generic
    /// right-hand side at `t0` when the problem is not separable. All
    /// problems passed here are autonomous.
    pub fn evaluate_split_rhs(&self, y: &[f64]) -> Result<StateVector> {
        self.check_dimension(y)?;
        let Some(split) = &self.separable else {
            return self.rhs(self.t0, y);
        };
        let n = y.len() / 2;
        let (p, q) = split_phase(y);
        let mut out = vec![0.0; y.len()];
        {
            let (dp, dq) = out.split_at_mut(n);
            (split.potential_gradient)(q, dp);
            dp.iter_mut().for_each(|v| *v = -*v);
            (split.kinetic_gradient)(p, dq);
        }
        Ok(out)
    }

    pub fn hamiltonian(&self, y: &[f64]) -> Option<f64> {
        self.hamiltonian.as_ref().map(|h| h(y))
    }

    pub fn exact(&self, t: f64) -> Option<StateVector> {
        self.exact.as_ref().map(|e| e(t))
    }

    /// Signed relative energy error `(H(y) - e0) / e0`.
    ///
    /// Returns [`Error::ZeroReferenceEnergy`] with the absolute error when
    /// `e0 == 0`.
    pub fn energy_error(&self, y: &[f64], e0: f64) -> Result<f64> {
        self.check_dimension(y)?;
        let h = self
            .hamiltonian(y)
            .ok_or(Error::UnsupportedMetric("problem has no Hamiltonian"))?;
        if e0 == 0.0 {
            return Err(Error::ZeroReferenceEnergy { absolute: h - e0 });
        }
        Ok((h - e0) / e0)
    }

    /// Euclidean norm of `y - exact(t)` over all components.
    pub fn global_error(&self, t: f64, y: &[f64]) -> Result<f64> {
        self.check_dimension(y)?;
        let exact = self
            .exact(t)
            .ok_or(Error::UnsupportedMetric("problem has no exact solution"))?;
        Ok(distance(y, &exact))
    }

    fn check_dimension(&self, y: &[f64]) -> Result<()> {
        if y.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                got: y.len(),
            });
        }
        Ok(())
    }
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// A sampled trajectory with its error metrics and cost counters.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub method: String,
    pub problem: String,
    pub h: f64,
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    /// `E_g` per sample; present iff the problem has an exact solution.
    pub global_errors: Option<Vec<f64>>,
    /// Signed `E_e` per sample; present iff the problem has a Hamiltonian.
    pub energy_errors: Option<Vec<f64>>,
    /// Set when `H(y0) == 0` and `energy_errors` hold absolute differences.
    pub energy_errors_absolute: bool,
    pub wall_seconds: f64,
    pub steps: usize,
    pub solver_iterations: usize,
}
