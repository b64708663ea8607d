//! Continuous Galerkin–Petrov time stepping.
//!
//! On each interval `[t, t + h]` the discrete solution is a polynomial of
//! degree `k` written in the Lagrange basis of the `k + 1` Gauss–Lobatto
//! points, so its coefficients are the values `U^0, ..., U^k` at the mapped
//! Lobatto points. Testing against `k` polynomials of degree `k - 1` and
//! integrating the right-hand side with the Lobatto rule gives
//!
//! ```text
//! sum_j alpha[i][j] U^j = h/2 sum_mu beta[i][mu] F(t_mu, U^mu),   i = 0..k-1
//! ```
//!
//! with `U^0` inherited from the previous interval. `k = 1` is the
//! Crank–Nicolson scheme; `k = 2` is the fourth order scheme
//!
//! ```text
//! U^1 = (U^0 + U^2)/2 + h/8 (F^0 - F^2)
//! U^2 = U^0 + h/6 (F^0 + 4 F^1 + F^2)
//! ```
//!
//! solved as a fixed point problem in `U^2` alone.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::{OdeProblem, StateVector};
use crate::solver::{solve_stage_fixed_point, SolveReport, SolverConfig};
use crate::stepper::{CompensatedSum, Stepper};

/// Highest order with a tabulated Lobatto rule.
pub const MAX_ORDER: usize = 5;

/// Nodes and weights of the `(k + 1)`-point Gauss–Lobatto rule on `[-1, 1]`.
/// Exact for polynomials of degree `2k - 1`.
pub fn lobatto_rule(k: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let rule = match k {
        1 => (vec![-1.0, 1.0], vec![1.0, 1.0]),
        2 => (vec![-1.0, 0.0, 1.0], vec![1.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0]),
        3 => {
            let x = 1.0 / 5.0_f64.sqrt();
            (
                vec![-1.0, -x, x, 1.0],
                vec![1.0 / 6.0, 5.0 / 6.0, 5.0 / 6.0, 1.0 / 6.0],
            )
        }
        4 => {
            let x = (3.0_f64 / 7.0).sqrt();
            (
                vec![-1.0, -x, 0.0, x, 1.0],
                vec![0.1, 49.0 / 90.0, 32.0 / 45.0, 49.0 / 90.0, 0.1],
            )
        }
        5 => {
            let s7 = 7.0_f64.sqrt();
            let inner = (1.0 / 3.0 - 2.0 * s7 / 21.0).sqrt();
            let outer = (1.0 / 3.0 + 2.0 * s7 / 21.0).sqrt();
            let w_inner = (14.0 + s7) / 30.0;
            let w_outer = (14.0 - s7) / 30.0;
            (
                vec![-1.0, -outer, -inner, inner, outer, 1.0],
                vec![1.0 / 15.0, w_outer, w_inner, w_inner, w_outer, 1.0 / 15.0],
            )
        }
        _ => {
            return Err(Error::UnsupportedOrder {
                order: k,
                supported: "1..=5",
            })
        }
    };
    Ok(rule)
}

fn barycentric_weights(nodes: &[f64]) -> Vec<f64> {
    (0..nodes.len())
        .map(|j| {
            let prod: f64 = (0..nodes.len())
                .filter(|&m| m != j)
                .map(|m| nodes[j] - nodes[m])
                .product();
            1.0 / prod
        })
        .collect()
}

/// Value of the `j`-th Lagrange basis polynomial on `nodes` at `x`.
pub fn lagrange_basis(nodes: &[f64], j: usize, x: f64) -> f64 {
    (0..nodes.len())
        .filter(|&m| m != j)
        .map(|m| (x - nodes[m]) / (nodes[j] - nodes[m]))
        .product()
}

/// `d[mu][j]` is the derivative of the `j`-th Lagrange basis polynomial at
/// node `mu`.
fn lagrange_derivatives(nodes: &[f64]) -> DMatrix<f64> {
    let n = nodes.len();
    let w = barycentric_weights(nodes);
    let mut d = DMatrix::zeros(n, n);
    for mu in 0..n {
        let mut diag = 0.0;
        for j in 0..n {
            if j != mu {
                let v = (w[j] / w[mu]) / (nodes[mu] - nodes[j]);
                d[(mu, j)] = v;
                diag -= v;
            }
        }
        d[(mu, mu)] = diag;
    }
    d
}

fn horner(coefficients: &[f64], x: f64) -> f64 {
    coefficients.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Reference-interval coefficients of the cGP(k) scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct CgpCoefficients {
    pub order: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Test basis polynomials as monomial coefficients, lowest degree first.
    pub test_basis: Vec<Vec<f64>>,
    /// `k x (k+1)`: integrals of trial derivative times test function.
    pub alpha: DMatrix<f64>,
    /// `k x (k+1)`: Lobatto weights times test function values.
    pub beta: DMatrix<f64>,
    /// `(k+1) x (k+1)`: trial basis values at the nodes.
    pub gamma: DMatrix<f64>,
}

impl CgpCoefficients {
    /// Evaluates the interval polynomial with Lobatto-point values `stages`
    /// at reference coordinate `theta` in `[-1, 1]`.
    pub fn interpolate(&self, stages: &[StateVector], theta: f64) -> StateVector {
        assert_eq!(stages.len(), self.order + 1);
        let mut out = vec![0.0; stages[0].len()];
        for (j, stage) in stages.iter().enumerate() {
            let phi = lagrange_basis(&self.nodes, j, theta);
            for (o, s) in out.iter_mut().zip(stage) {
                *o += phi * s;
            }
        }
        out
    }
}

/// Assembles the cGP(k) coefficients for an explicit test basis given as
/// monomial coefficient vectors of degree at most `k - 1`.
pub fn assemble_with_test_basis(k: usize, test_basis: Vec<Vec<f64>>) -> Result<CgpCoefficients> {
    let (nodes, weights) = lobatto_rule(k)?;
    if test_basis.len() != k || test_basis.iter().any(|p| p.len() > k) {
        return Err(Error::Config(format!(
            "cGP({k}) needs {k} test polynomials of degree < {k}"
        )));
    }
    let d = lagrange_derivatives(&nodes);
    let mut alpha = DMatrix::zeros(k, k + 1);
    let mut beta = DMatrix::zeros(k, k + 1);
    for (i, psi) in test_basis.iter().enumerate() {
        for mu in 0..=k {
            let psi_mu = horner(psi, nodes[mu]);
            beta[(i, mu)] = weights[mu] * psi_mu;
            // Integrand has degree 2k - 2, so the Lobatto rule is exact.
            for j in 0..=k {
                alpha[(i, j)] += weights[mu] * d[(mu, j)] * psi_mu;
            }
        }
    }
    let gamma = DMatrix::from_fn(k + 1, k + 1, |j, mu| lagrange_basis(&nodes, j, nodes[mu]));
    Ok(CgpCoefficients {
        order: k,
        nodes,
        weights,
        test_basis,
        alpha,
        beta,
        gamma,
    })
}

/// Coefficients of cGP(k).
///
/// `k = 1` tests with `1`; `k = 2` with `-3/4 θ` and `1`. For `k >= 3` the
/// test basis is the one that makes the block of `alpha` acting on the
/// unknowns `U^1..U^k` the identity, so each stage is given explicitly in
/// terms of `U^0` and the right-hand side values. Every choice of basis of
/// the degree `k - 1` polynomials yields the same discrete solution.
pub fn assemble_cgp(k: usize) -> Result<CgpCoefficients> {
    match k {
        1 => assemble_with_test_basis(1, vec![vec![1.0]]),
        2 => assemble_with_test_basis(2, vec![vec![0.0, -0.75], vec![1.0]]),
        3..=MAX_ORDER => {
            let monomials: Vec<Vec<f64>> = (0..k)
                .map(|m| {
                    let mut c = vec![0.0; k];
                    c[m] = 1.0;
                    c
                })
                .collect();
            let raw = assemble_with_test_basis(k, monomials)?;
            let unknown_block = raw.alpha.columns(1, k).into_owned();
            let transform = unknown_block
                .try_inverse()
                .ok_or_else(|| Error::Config(format!("singular cGP({k}) system")))?;
            let test_basis = (0..k)
                .map(|i| (0..k).map(|m| transform[(i, m)]).collect())
                .collect();
            Ok(CgpCoefficients {
                alpha: &transform * &raw.alpha,
                beta: &transform * &raw.beta,
                test_basis,
                ..raw
            })
        }
        _ => Err(Error::UnsupportedOrder {
            order: k,
            supported: "1..=5",
        }),
    }
}

fn axpy(out: &mut [f64], a: f64, x: &[f64]) {
    for (o, v) in out.iter_mut().zip(x) {
        *o += a * v;
    }
}

/// Crank–Nicolson, i.e. cGP(1):
/// `U^n = U^{n-1} + h/2 (F(t_{n-1}, U^{n-1}) + F(t_n, U^n))`.
///
/// Like every implicit stepper here, it iterates on the increment
/// `Z = U^n - U^{n-1}` rather than on `U^n`, which keeps the iterate small
/// and lets [`Stepper::step`] add it with compensated summation.
#[derive(Debug, Clone, Default)]
pub struct Cgp1 {
    pub solver: SolverConfig,
    f0: Vec<f64>,
    f1: Vec<f64>,
    u: Vec<f64>,
    z: Vec<f64>,
    sum: CompensatedSum,
}

impl Cgp1 {
    pub fn new(solver: SolverConfig) -> Self {
        Self {
            solver,
            ..Self::default()
        }
    }

    fn solve(&mut self, problem: &OdeProblem, t: f64, y: &[f64], h: f64) -> Result<SolveReport> {
        let n = y.len();
        for buf in [&mut self.f0, &mut self.f1, &mut self.u] {
            buf.resize(n, 0.0);
        }
        self.z.clear();
        self.z.resize(n, 0.0);
        problem.rhs_into(t, y, &mut self.f0);
        let Self { f0, f1, u, z, .. } = self;
        let f0 = &*f0;
        solve_stage_fixed_point(
            |z, next| {
                add_into(u, y, z);
                problem.rhs_into(t + h, u, f1);
                for i in 0..n {
                    next[i] = 0.5 * h * (f0[i] + f1[i]);
                }
            },
            z,
            &self.solver,
        )
    }

    /// Writes `U^n` into `out`.
    pub fn advance(
        &mut self,
        problem: &OdeProblem,
        t: f64,
        y: &[f64],
        h: f64,
        out: &mut [f64],
    ) -> Result<SolveReport> {
        let report = self.solve(problem, t, y, h)?;
        add_into(out, y, &self.z);
        Ok(report)
    }
}

impl Stepper for Cgp1 {
    fn label(&self) -> String {
        "cgp1".into()
    }

    fn start(&mut self, problem: &OdeProblem, _h: f64) -> Result<Vec<StateVector>> {
        self.sum.reset(problem.dimension());
        Ok(vec![problem.y0().to_vec()])
    }

    fn step(
        &mut self,
        problem: &OdeProblem,
        t: f64,
        inputs: &mut [StateVector],
        h: f64,
    ) -> Result<usize> {
        let report = self.solve(problem, t, &inputs[0], h)?;
        self.sum.add(&mut inputs[0], &self.z);
        Ok(report.iterations)
    }
}

/// One cGP(1) step from `y` at `t`.
pub fn step_cgp1(
    problem: &OdeProblem,
    t: f64,
    y: &[f64],
    h: f64,
    solver: &SolverConfig,
) -> Result<StateVector> {
    let mut out = vec![0.0; y.len()];
    Cgp1::new(*solver).advance(problem, t, y, h, &mut out)?;
    Ok(out)
}

/// `out = y + z`.
fn add_into(out: &mut [f64], y: &[f64], z: &[f64]) {
    for ((o, a), b) in out.iter_mut().zip(y).zip(z) {
        *o = a + b;
    }
}

/// cGP(2) with the Simpson rule, iterating the fixed point map for the
/// increment `U^2 - U^0`.
#[derive(Debug, Clone, Default)]
pub struct Cgp2 {
    pub solver: SolverConfig,
    f0: Vec<f64>,
    f1: Vec<f64>,
    f2: Vec<f64>,
    u2: Vec<f64>,
    mid: Vec<f64>,
    z: Vec<f64>,
    sum: CompensatedSum,
}

impl Cgp2 {
    pub fn new(solver: SolverConfig) -> Self {
        Self {
            solver,
            ..Self::default()
        }
    }

    /// Midpoint value `U^1` from the most recent [`Cgp2::advance`] call.
    pub fn midpoint(&self) -> &[f64] {
        &self.mid
    }

    fn solve(&mut self, problem: &OdeProblem, t: f64, y: &[f64], h: f64) -> Result<SolveReport> {
        let n = y.len();
        for buf in [
            &mut self.f0,
            &mut self.f1,
            &mut self.f2,
            &mut self.u2,
            &mut self.mid,
        ] {
            buf.resize(n, 0.0);
        }
        self.z.clear();
        self.z.resize(n, 0.0);
        problem.rhs_into(t, y, &mut self.f0);
        let Self {
            f0,
            f1,
            f2,
            u2,
            mid,
            z,
            ..
        } = self;
        let f0 = &*f0;
        let (t_mid, t_end) = (t + 0.5 * h, t + h);
        solve_stage_fixed_point(
            |z2, next| {
                add_into(u2, y, z2);
                problem.rhs_into(t_end, u2, f2);
                for i in 0..n {
                    mid[i] = y[i] + (0.5 * z2[i] + 0.125 * h * (f0[i] - f2[i]));
                }
                problem.rhs_into(t_mid, mid, f1);
                for i in 0..n {
                    next[i] = h / 6.0 * (f0[i] + 4.0 * f1[i] + f2[i]);
                }
            },
            z,
            &self.solver,
        )
    }

    /// Writes `U^2` into `end`; `U^1` is available from [`Cgp2::midpoint`].
    pub fn advance(
        &mut self,
        problem: &OdeProblem,
        t: f64,
        y: &[f64],
        h: f64,
        end: &mut [f64],
    ) -> Result<SolveReport> {
        let report = self.solve(problem, t, y, h)?;
        add_into(end, y, &self.z);
        // The solver's last map evaluation need not be at the returned
        // iterate (e.g. after a Newton fallback), so rebuild U^1 from it.
        problem.rhs_into(t + h, end, &mut self.f2);
        for (i, (m, y)) in self.mid.iter_mut().zip(y).enumerate() {
            *m = y + (0.5 * self.z[i] + 0.125 * h * (self.f0[i] - self.f2[i]));
        }
        Ok(report)
    }
}

impl Stepper for Cgp2 {
    fn label(&self) -> String {
        "cgp2".into()
    }

    fn start(&mut self, problem: &OdeProblem, _h: f64) -> Result<Vec<StateVector>> {
        self.sum.reset(problem.dimension());
        Ok(vec![problem.y0().to_vec()])
    }

    fn step(
        &mut self,
        problem: &OdeProblem,
        t: f64,
        inputs: &mut [StateVector],
        h: f64,
    ) -> Result<usize> {
        let report = self.solve(problem, t, &inputs[0], h)?;
        self.sum.add(&mut inputs[0], &self.z);
        Ok(report.iterations)
    }
}

/// One cGP(2) step from `y` at `t`, returning `(U^1, U^2)`: the value at the
/// interval midpoint and the value at `t + h`.
pub fn step_cgp2(
    problem: &OdeProblem,
    t: f64,
    y: &[f64],
    h: f64,
    solver: &SolverConfig,
) -> Result<(StateVector, StateVector)> {
    let mut stepper = Cgp2::new(*solver);
    let mut end = vec![0.0; y.len()];
    stepper.advance(problem, t, y, h, &mut end)?;
    Ok((stepper.mid, end))
}

/// cGP(k) for any tabulated order, solving for all `k` unknown stages at
/// once by fixed point iteration.
#[derive(Debug, Clone)]
pub struct CgpK {
    pub coefficients: CgpCoefficients,
    pub solver: SolverConfig,
    /// `U^j - U^0 = h/2 sum_mu stage_weights[j][mu] F^mu`, `j = 1..k`.
    stage_weights: DMatrix<f64>,
    f: Vec<Vec<f64>>,
    /// Stage increments `U^j - U^0`, concatenated.
    z: Vec<f64>,
    u: Vec<f64>,
    sum: CompensatedSum,
}

impl CgpK {
    pub fn new(k: usize, solver: SolverConfig) -> Result<Self> {
        let coefficients = assemble_cgp(k)?;
        let inverse = coefficients
            .alpha
            .columns(1, k)
            .into_owned()
            .try_inverse()
            .ok_or_else(|| Error::Config(format!("singular cGP({k}) system")))?;
        // Rows of alpha sum to zero, so U^0 enters every stage with weight one
        // and the stage equations close on the increments.
        let stage_weights = &inverse * &coefficients.beta;
        Ok(Self {
            coefficients,
            solver,
            stage_weights,
            f: Vec::new(),
            z: Vec::new(),
            u: Vec::new(),
            sum: CompensatedSum::default(),
        })
    }

    pub fn order(&self) -> usize {
        self.coefficients.order
    }

    /// Lobatto-point values `U^0..U^k` of the most recent step from `y0`.
    pub fn stage_values(&self, y0: &[f64]) -> Vec<StateVector> {
        let n = y0.len();
        std::iter::once(y0.to_vec())
            .chain(self.z.chunks(n).map(|z| {
                let mut u = vec![0.0; n];
                add_into(&mut u, y0, z);
                u
            }))
            .collect()
    }

    fn solve(&mut self, problem: &OdeProblem, t: f64, y: &[f64], h: f64) -> Result<SolveReport> {
        let k = self.order();
        let n = y.len();
        self.f.resize(k + 1, Vec::new());
        for f in &mut self.f {
            f.resize(n, 0.0);
        }
        self.u.resize(n, 0.0);
        let times: Vec<f64> = self
            .coefficients
            .nodes
            .iter()
            .map(|theta| t + 0.5 * h * (1.0 + theta))
            .collect();
        problem.rhs_into(times[0], y, &mut self.f[0]);
        self.z.clear();
        self.z.resize(k * n, 0.0);
        let Self {
            stage_weights,
            f,
            z,
            u,
            solver,
            ..
        } = self;
        solve_stage_fixed_point(
            |z, next| {
                for mu in 1..=k {
                    add_into(u, y, &z[(mu - 1) * n..mu * n]);
                    problem.rhs_into(times[mu], u, &mut f[mu]);
                }
                next.fill(0.0);
                for j in 0..k {
                    let out = &mut next[j * n..(j + 1) * n];
                    for mu in 0..=k {
                        axpy(out, 0.5 * h * stage_weights[(j, mu)], &f[mu]);
                    }
                }
            },
            z,
            solver,
        )
    }

    pub fn advance(
        &mut self,
        problem: &OdeProblem,
        t: f64,
        y: &[f64],
        h: f64,
        end: &mut [f64],
    ) -> Result<SolveReport> {
        let report = self.solve(problem, t, y, h)?;
        let k = self.order();
        add_into(end, y, &self.z[(k - 1) * y.len()..]);
        Ok(report)
    }
}

impl Stepper for CgpK {
    fn label(&self) -> String {
        format!("cgp{}", self.order())
    }

    fn start(&mut self, problem: &OdeProblem, _h: f64) -> Result<Vec<StateVector>> {
        self.sum.reset(problem.dimension());
        Ok(vec![problem.y0().to_vec()])
    }

    fn step(
        &mut self,
        problem: &OdeProblem,
        t: f64,
        inputs: &mut [StateVector],
        h: f64,
    ) -> Result<usize> {
        let report = self.solve(problem, t, &inputs[0], h)?;
        let offset = (self.order() - 1) * inputs[0].len();
        self.sum.add(&mut inputs[0], &self.z[offset..]);
        Ok(report.iterations)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    /// Moment equations: sum_mu w_mu x_mu^m = int_{-1}^{1} x^m dx.
    fn moments_hold(nodes: &[f64], weights: &[f64], degree: usize) -> bool {
        (0..=degree).all(|m| {
            let quad: f64 = nodes
                .iter()
                .zip(weights)
                .map(|(x, w)| w * x.powi(m as i32))
                .sum();
            let exact = if m % 2 == 0 {
                2.0 / (m as f64 + 1.0)
            } else {
                0.0
            };
            close(quad, exact, 1e-14)
        })
    }

    #[test]
    fn lobatto_tabulated_values() {
        assert_eq!(lobatto_rule(1).unwrap(), (vec![-1.0, 1.0], vec![1.0, 1.0]));
        let (x, w) = lobatto_rule(2).unwrap();
        assert_eq!(x, vec![-1.0, 0.0, 1.0]);
        assert_eq!(w, vec![1.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0]);
        let (x, w) = lobatto_rule(3).unwrap();
        let s = 1.0 / 5.0_f64.sqrt();
        assert!(close(x[1], -s, 1e-16) && close(x[2], s, 1e-16));
        assert_eq!(w, vec![1.0 / 6.0, 5.0 / 6.0, 5.0 / 6.0, 1.0 / 6.0]);
    }

    #[test]
    fn lobatto_rules_integrate_degree_2k_minus_1() {
        for k in 1..=MAX_ORDER {
            let (x, w) = lobatto_rule(k).unwrap();
            assert!(moments_hold(&x, &w, 2 * k - 1), "k = {k}");
            assert!(!moments_hold(&x, &w, 2 * k), "k = {k} exact beyond 2k-1");
            assert!(close(w.iter().sum::<f64>(), 2.0, 1e-15));
            assert!(x.windows(2).all(|p| p[0] < p[1]));
            for (a, b) in x.iter().zip(x.iter().rev()) {
                assert!(close(*a, -b, 1e-16));
            }
        }
        assert!(matches!(
            lobatto_rule(0),
            Err(Error::UnsupportedOrder { order: 0, .. })
        ));
        assert!(lobatto_rule(6).is_err());
    }

    #[test]
    fn cgp1_coefficients() {
        let c = assemble_cgp(1).unwrap();
        assert_eq!(c.alpha.as_slice(), &[-1.0, 1.0]);
        assert_eq!(c.beta.as_slice(), &[1.0, 1.0]);
    }

    #[test]
    fn cgp2_coefficients_match_closed_form() {
        let c = assemble_cgp(2).unwrap();
        let alpha = [[-0.5, 1.0, -0.5], [-1.0, 0.0, 1.0]];
        let beta = [[0.25, 0.0, -0.25], [1.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0]];
        for i in 0..2 {
            for j in 0..3 {
                assert!(close(c.alpha[(i, j)], alpha[i][j], 1e-15), "alpha {i}{j}");
                assert!(close(c.beta[(i, j)], beta[i][j], 1e-15), "beta {i}{j}");
            }
        }
    }

    #[test]
    fn coefficient_identities_hold_for_all_orders() {
        for k in 1..=MAX_ORDER {
            let c = assemble_cgp(k).unwrap();
            assert_eq!(c.alpha.shape(), (k, k + 1));
            assert_eq!(c.beta.shape(), (k, k + 1));
            for j in 0..=k {
                for mu in 0..=k {
                    let expected = if j == mu { 1.0 } else { 0.0 };
                    assert!(close(c.gamma[(j, mu)], expected, 1e-15));
                }
            }
            for i in 0..k {
                let row: f64 = c.alpha.row(i).iter().sum();
                assert!(row.abs() <= 1e-13, "k={k} row {i} sum {row}");
            }
        }
    }

    #[test]
    fn higher_order_coefficients_are_decoupled() {
        for k in 3..=MAX_ORDER {
            let c = assemble_cgp(k).unwrap();
            let block = c.alpha.columns(1, k).into_owned();
            assert!((block - DMatrix::identity(k, k)).amax() < 1e-12, "k = {k}");
        }
    }

    #[test]
    fn interpolation_reproduces_stage_values() {
        let c = assemble_cgp(2).unwrap();
        let stages = vec![vec![1.0, 2.0], vec![-0.5, 0.25], vec![3.0, -1.0]];
        for (theta, expected) in [-1.0, 0.0, 1.0].iter().zip(&stages) {
            assert_eq!(&c.interpolate(&stages, *theta), expected);
        }
    }

    fn decay(lambda: f64) -> OdeProblem {
        OdeProblem::new("decay", vec![1.0], move |_, y, out| out[0] = lambda * y[0])
    }

    #[test]
    fn crank_nicolson_on_linear_decay() {
        let y = step_cgp1(&decay(-1.0), 0.0, &[1.0], 0.1, &SolverConfig::default()).unwrap();
        assert!(close(y[0], 0.95 / 1.05, 1e-15), "{:e}", y[0] - 0.95 / 1.05);
    }

    #[test]
    fn zero_rhs_leaves_state_unchanged() {
        let zero = OdeProblem::new("zero", vec![1.0, -2.0], |_, _, out| out.fill(0.0));
        let (mid, end) =
            step_cgp2(&zero, 0.0, &[1.0, -2.0], 0.3, &SolverConfig::default()).unwrap();
        assert_eq!(mid, vec![1.0, -2.0]);
        assert_eq!(end, vec![1.0, -2.0]);
    }

    #[test]
    fn state_independent_polynomials_are_integrated_exactly() {
        // y' = p(t) with deg p <= k: one step reproduces the exact integral.
        let poly = OdeProblem::new("poly", vec![0.5], |t, _, out| {
            out[0] = 1.0 - 2.0 * t + 3.0 * t * t;
        });
        let antiderivative = |t: f64| 0.5 + t - t * t + t * t * t;
        let (t, h) = (0.3, 0.7);
        let (mid, end) =
            step_cgp2(&poly, t, &[antiderivative(t)], h, &SolverConfig::default()).unwrap();
        assert!(close(end[0], antiderivative(t + h), 1e-15));
        assert!(close(mid[0], antiderivative(t + 0.5 * h), 1e-15));

        for k in 1..=MAX_ORDER {
            let mut stepper = CgpK::new(k, SolverConfig::default()).unwrap();
            let deg = k;
            let p = OdeProblem::new("poly", vec![0.0], move |t, _, out| {
                out[0] = (0..=deg).map(|m| t.powi(m as i32)).sum();
            });
            let exact = |t: f64| {
                (0..=k)
                    .map(|m| t.powi(m as i32 + 1) / (m as f64 + 1.0))
                    .sum::<f64>()
            };
            let mut end = vec![0.0];
            stepper.advance(&p, t, &[exact(t)], h, &mut end).unwrap();
            assert!(close(end[0], exact(t + h), 1e-14), "k = {k}");
        }
    }

    #[test]
    fn generic_orders_one_and_two_agree_with_specialized_steppers() {
        let problem = OdeProblem::new("pendulum", vec![0.3, 1.1], |_, y, out| {
            out[0] = -y[1].sin();
            out[1] = y[0];
        });
        let config = SolverConfig::default();
        let y = [0.3, 1.1];
        for (k, expected) in [
            (1, step_cgp1(&problem, 0.0, &y, 0.1, &config).unwrap()),
            (2, step_cgp2(&problem, 0.0, &y, 0.1, &config).unwrap().1),
        ] {
            let mut generic = CgpK::new(k, config).unwrap();
            let mut end = vec![0.0; 2];
            generic.advance(&problem, 0.0, &y, 0.1, &mut end).unwrap();
            for (a, b) in end.iter().zip(&expected) {
                assert!(close(*a, *b, 1e-14), "k = {k}");
            }
        }
    }

    #[test]
    fn cgp3_has_order_six_at_the_nodes() {
        let problem = decay(-1.0);
        let error = |steps: usize| {
            let h = 1.0 / steps as f64;
            let mut stepper = CgpK::new(3, SolverConfig::default()).unwrap();
            let mut y = vec![1.0];
            for n in 0..steps {
                let prev = y.clone();
                stepper
                    .advance(&problem, n as f64 * h, &prev, h, &mut y)
                    .unwrap();
            }
            (y[0] - (-1.0_f64).exp()).abs()
        };
        let order = (error(4) / error(8)).log2();
        assert!((order - 6.0).abs() < 0.3, "observed order {order}");
    }
}
