//! Implicit Runge–Kutta engine with the two-stage Gauss method.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::{OdeProblem, StateVector};
use crate::solver::{solve_stage_fixed_point, SolveReport, SolverConfig};
use crate::stepper::{CompensatedSum, Stepper};

/// Butcher tableau `(A, b, c)` of an `s`-stage Runge–Kutta method.
#[derive(Debug, Clone, PartialEq)]
pub struct RkTableau {
    pub a: DMatrix<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

impl RkTableau {
    pub fn new(a: DMatrix<f64>, b: Vec<f64>, c: Vec<f64>) -> Result<Self> {
        let t = Self { a, b, c };
        t.validate()?;
        Ok(t)
    }

    pub fn stages(&self) -> usize {
        self.b.len()
    }

    /// Checks shapes, `c_i = sum_j a_ij` and `sum b_i = 1`.
    pub fn validate(&self) -> Result<()> {
        let s = self.stages();
        if s == 0 || self.a.shape() != (s, s) || self.c.len() != s {
            return Err(Error::Config(format!(
                "inconsistent tableau shapes: A {:?}, b {}, c {}",
                self.a.shape(),
                s,
                self.c.len()
            )));
        }
        for i in 0..s {
            let row: f64 = self.a.row(i).iter().sum();
            if (row - self.c[i]).abs() > 1e-14 {
                return Err(Error::Config(format!("row {i} of A does not sum to c_{i}")));
            }
        }
        if (self.b.iter().sum::<f64>() - 1.0).abs() > 1e-14 {
            return Err(Error::Config("weights b do not sum to 1".into()));
        }
        Ok(())
    }

    /// `M_ij = b_i a_ij + b_j a_ji - b_i b_j`; zero for symplectic methods.
    pub fn symplecticity_residual(&self) -> DMatrix<f64> {
        let s = self.stages();
        DMatrix::from_fn(s, s, |i, j| {
            self.b[i] * self.a[(i, j)] + self.b[j] * self.a[(j, i)] - self.b[i] * self.b[j]
        })
    }
}

/// Two-stage Gauss–Legendre collocation method (order 4).
pub fn gauss2_tableau() -> RkTableau {
    let r = 3.0_f64.sqrt() / 6.0;
    RkTableau {
        a: DMatrix::from_row_slice(2, 2, &[0.25, 0.25 - r, 0.25 + r, 0.25]),
        b: vec![0.5, 0.5],
        c: vec![0.5 - r, 0.5 + r],
    }
}

/// Implicit Runge–Kutta stepper: solves
/// `Y_i = y + h sum_j a_ij f(t + c_j h, Y_j)` for the stages and returns
/// `y + h sum_i b_i f(t + c_i h, Y_i)`.
#[derive(Debug, Clone)]
pub struct Irk {
    pub tableau: RkTableau,
    pub solver: SolverConfig,
    /// Stage increments `Y_i - y`, concatenated.
    z: Vec<f64>,
    u: Vec<f64>,
    f: Vec<f64>,
    delta: Vec<f64>,
    sum: CompensatedSum,
}

impl Irk {
    pub fn new(tableau: RkTableau, solver: SolverConfig) -> Self {
        Self {
            tableau,
            solver,
            z: Vec::new(),
            u: Vec::new(),
            f: Vec::new(),
            delta: Vec::new(),
            sum: CompensatedSum::default(),
        }
    }

    pub fn gauss2(solver: SolverConfig) -> Self {
        Self::new(gauss2_tableau(), solver)
    }

    /// Solves `Z_i = h sum_j a_ij f(t + c_j h, y + Z_j)` and leaves the step
    /// increment `h sum_i b_i f(t + c_i h, y + Z_i)` in `self.delta`.
    fn solve(&mut self, problem: &OdeProblem, t: f64, y: &[f64], h: f64) -> Result<SolveReport> {
        let s = self.tableau.stages();
        let n = y.len();
        self.z.clear();
        self.z.resize(s * n, 0.0);
        self.u.resize(n, 0.0);
        self.f.resize(s * n, 0.0);
        self.delta.resize(n, 0.0);
        let Self {
            tableau,
            solver,
            z,
            u,
            f,
            delta,
            ..
        } = self;
        let report = solve_stage_fixed_point(
            |z, next| {
                stage_derivatives(problem, tableau, t, h, y, z, u, f);
                next.fill(0.0);
                for i in 0..s {
                    let row = &mut next[i * n..(i + 1) * n];
                    for j in 0..s {
                        let w = h * tableau.a[(i, j)];
                        for (r, fj) in row.iter_mut().zip(&f[j * n..(j + 1) * n]) {
                            *r += w * fj;
                        }
                    }
                }
            },
            z,
            solver,
        )?;
        stage_derivatives(problem, tableau, t, h, y, z, u, f);
        delta.fill(0.0);
        for i in 0..s {
            let w = h * tableau.b[i];
            for (d, fi) in delta.iter_mut().zip(&f[i * n..(i + 1) * n]) {
                *d += w * fi;
            }
        }
        Ok(report)
    }

    pub fn advance(
        &mut self,
        problem: &OdeProblem,
        t: f64,
        y: &[f64],
        h: f64,
        out: &mut [f64],
    ) -> Result<SolveReport> {
        let report = self.solve(problem, t, y, h)?;
        for ((o, a), d) in out.iter_mut().zip(y).zip(&self.delta) {
            *o = a + d;
        }
        Ok(report)
    }
}

#[allow(clippy::too_many_arguments)]
fn stage_derivatives(
    problem: &OdeProblem,
    tableau: &RkTableau,
    t: f64,
    h: f64,
    y: &[f64],
    z: &[f64],
    u: &mut [f64],
    f: &mut [f64],
) {
    let n = y.len();
    for (i, c) in tableau.c.iter().enumerate() {
        for ((v, a), b) in u.iter_mut().zip(y).zip(&z[i * n..(i + 1) * n]) {
            *v = a + b;
        }
        problem.rhs_into(t + c * h, u, &mut f[i * n..(i + 1) * n]);
    }
}

impl Stepper for Irk {
    fn label(&self) -> String {
        if self.tableau == gauss2_tableau() {
            "irk4".into()
        } else {
            format!("irk{}", self.tableau.stages())
        }
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
        self.sum.add(&mut inputs[0], &self.delta);
        Ok(report.iterations)
    }
}

/// One implicit Runge–Kutta step with `tableau`.
pub fn step_irk(
    problem: &OdeProblem,
    t: f64,
    y: &[f64],
    h: f64,
    tableau: &RkTableau,
    solver: &SolverConfig,
) -> Result<StateVector> {
    let mut out = vec![0.0; y.len()];
    Irk::new(tableau.clone(), *solver).advance(problem, t, y, h, &mut out)?;
    Ok(out)
}
