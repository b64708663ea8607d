//! General linear methods.
//!
//! A method with `s` stages acting on an input vector of `r` state-sized
//! components computes, on each step,
//!
//! ```text
//! Y     = h A F(Y) + U y_in       (s stage values)
//! y_out = h B F(Y) + V y_in       (r output components)
//! ```
//!
//! where `F(Y)_i = f(t + c_i h, Y_i)` and `c = A 1`. Tableaux are data: they
//! are loaded from text files (see [`load_glm_tableau`]) or built from a
//! Runge–Kutta tableau with [`GlmTableau::from_rk`].
//!
//! # Tableau file format
//!
//! Line oriented; `#` starts a comment and blank lines are ignored.
//!
//! ```text
//! s 2            # stages
//! r 1            # input vector length
//! p 4            # declared order
//! A              # s rows of s entries
//! 1/4 -0.03867513459481287
//! 0.5386751345948129 1/4
//! U              # s rows of r entries
//! 1
//! 1
//! B              # r rows of s entries
//! 1/2 1/2
//! V              # r rows of r entries
//! 1
//! starter identity
//! ```
//!
//! Header lines may also be written `s = 2`. Entries are decimal literals
//! or exact rationals `n/d` of integers up to `2^53`, rounded once to the
//! nearest double. The starter is either `starter identity` (only for
//! `r = 1`) or a bare `starter` line followed by `r` rows; row `i` lists
//! the multipliers `c_0 c_1 ... c_m` defining input component `i` as
//! `sum_j c_j h^j y^(j)(t0)`. The first row must be exactly `1`.

use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::cgp::Cgp2;
use crate::error::{Error, Result};
use crate::irk::{gauss2_tableau, RkTableau};
use crate::model::{OdeProblem, StateVector};
use crate::solver::{solve_stage_fixed_point, SolveReport, SolverConfig};
use crate::stepper::Stepper;

/// Number of substeps per step used by the reference-integration starter.
pub const STARTER_REFINEMENT: usize = 100;
/// Reference samples on each side of `t0` in the starter's difference stencil.
const STARTER_HALF_WIDTH: usize = 4;
/// Reference substeps between stencil samples. Spacing the samples wider
/// than the reference step keeps round-off in the differences small.
const STARTER_STENCIL_STRIDE: usize = 10;
/// Powers `V^m`, `m <= VPOWER_HORIZON`, must stay below `VPOWER_BOUND`.
const VPOWER_HORIZON: usize = 10_000;
const VPOWER_BOUND: f64 = 1e3;

/// How the input vector of the first step is built from `y0`.
#[derive(Debug, Clone, PartialEq)]
pub enum StarterSpec {
    /// `[y0]`; only meaningful for `r = 1`.
    Identity,
    /// Component `i` is `sum_j rows[i][j] h^j y^(j)(t0)`, with the
    /// derivatives taken from a fine-step reference integration.
    Derivatives(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlmTableau {
    pub s: usize,
    pub r: usize,
    pub order: usize,
    pub a: DMatrix<f64>,
    pub u: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub v: DMatrix<f64>,
    pub starter: StarterSpec,
}

fn shape_error(matrix: &str, expected: (usize, usize), got: (usize, usize)) -> Error {
    Error::Config(format!(
        "matrix {matrix} must be {}x{}, found {}x{}",
        expected.0, expected.1, got.0, got.1
    ))
}

impl GlmTableau {
    /// Embeds a Runge–Kutta tableau as an `r = 1` method:
    /// `U = 1`, `B = b^T`, `V = [1]`.
    pub fn from_rk(rk: &RkTableau, order: usize) -> Self {
        let s = rk.stages();
        Self {
            s,
            r: 1,
            order,
            a: rk.a.clone(),
            u: DMatrix::from_element(s, 1, 1.0),
            b: DMatrix::from_row_slice(1, s, &rk.b),
            v: DMatrix::identity(1, 1),
            starter: StarterSpec::Identity,
        }
    }

    /// Forward Euler: `s = r = 1`, `A = [0]`, `U = B = V = [1]`.
    pub fn euler() -> Self {
        let one = DMatrix::from_element(1, 1, 1.0);
        Self {
            s: 1,
            r: 1,
            order: 1,
            a: DMatrix::zeros(1, 1),
            u: one.clone(),
            b: one.clone(),
            v: one,
            starter: StarterSpec::Identity,
        }
    }

    /// Two-stage Gauss method as an `r = 1` method.
    pub fn gauss2() -> Self {
        Self::from_rk(&gauss2_tableau(), 4)
    }

    /// Stage abscissae `c = A 1`.
    pub fn abscissae(&self) -> Vec<f64> {
        self.a.row_iter().map(|row| row.sum()).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let (s, r) = (self.s, self.r);
        if s == 0 || r == 0 {
            return Err(Error::Config("s and r must be positive".into()));
        }
        if self.order == 0 {
            return Err(Error::Config("declared order must be positive".into()));
        }
        for (name, m, shape) in [
            ("A", &self.a, (s, s)),
            ("U", &self.u, (s, r)),
            ("B", &self.b, (r, s)),
            ("V", &self.v, (r, r)),
        ] {
            if m.shape() != shape {
                return Err(shape_error(name, shape, m.shape()));
            }
            if m.iter().any(|x| !x.is_finite()) {
                return Err(Error::Config(format!(
                    "matrix {name} has a non-finite entry"
                )));
            }
        }
        match &self.starter {
            StarterSpec::Identity if r != 1 => {
                return Err(Error::Config(format!(
                    "identity starter needs r = 1, tableau has r = {r}"
                )));
            }
            StarterSpec::Identity => {}
            StarterSpec::Derivatives(rows) => {
                if rows.len() != r {
                    return Err(Error::Config(format!(
                        "starter defines {} components, tableau has r = {r}",
                        rows.len()
                    )));
                }
                if rows[0].first() != Some(&1.0) || rows[0][1..].iter().any(|c| *c != 0.0) {
                    return Err(Error::Config(
                        "starter component 1 must be exactly y(t0)".into(),
                    ));
                }
                if let Some(row) = rows
                    .iter()
                    .find(|row| row.len() > 2 * STARTER_HALF_WIDTH + 1)
                {
                    return Err(Error::Config(format!(
                        "starter derivatives above order {} are not supported (row has {} multipliers)",
                        2 * STARTER_HALF_WIDTH + 1,
                        row.len()
                    )));
                }
                if rows.iter().flatten().any(|c| !c.is_finite()) {
                    return Err(Error::Config("starter has a non-finite multiplier".into()));
                }
            }
        }
        let growth = v_power_growth(&self.v, VPOWER_HORIZON);
        if !(growth <= VPOWER_BOUND) {
            return Err(Error::Config(format!(
                "V is not power bounded: max |V^m| = {growth:e} for m <= {VPOWER_HORIZON}"
            )));
        }
        Ok(())
    }
}

/// `max_{1 <= m <= horizon} |V^m|_inf`.
pub fn v_power_growth(v: &DMatrix<f64>, horizon: usize) -> f64 {
    let norm = |m: &DMatrix<f64>| {
        m.row_iter()
            .map(|row| row.iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0_f64, f64::max)
    };
    let mut power = v.clone();
    let mut max = norm(&power);
    for _ in 1..horizon {
        power = &power * v;
        let n = norm(&power);
        if !n.is_finite() {
            return f64::INFINITY;
        }
        max = max.max(n);
    }
    max
}

/// Parses a number literal: a decimal or an exact rational `n/d`.
fn parse_number(token: &str) -> std::result::Result<f64, String> {
    if let Some((num, den)) = token.split_once('/') {
        let limit = 1_i64 << 53;
        let parse = |s: &str| {
            s.parse::<i64>()
                .ok()
                .filter(|v| v.abs() <= limit)
                .ok_or_else(|| format!("bad rational literal {token:?}"))
        };
        let (n, d) = (parse(num)?, parse(den)?);
        if d == 0 {
            return Err(format!("zero denominator in {token:?}"));
        }
        // Both operands are exact doubles, so the quotient is rounded once.
        Ok(n as f64 / d as f64)
    } else {
        token
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| format!("not a number: {token:?}"))
    }
}

/// Parses and validates a tableau file; see the module documentation for
/// the format.
pub fn load_glm_tableau(source: &str) -> Result<GlmTableau> {
    let lines: Vec<(usize, &str)> = source
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
        .collect();
    let last_line = source.lines().count().max(1);
    let mut cursor = 0;
    let parse_err = |line: usize, message: String| Error::Parse { line, message };

    let header = |key: &str, cursor: &mut usize| -> Result<usize> {
        let Some(&(line, text)) = lines.get(*cursor) else {
            return Err(parse_err(last_line, format!("missing header field {key}")));
        };
        let rest = text
            .strip_prefix(key)
            .map(|r| r.trim_start().trim_start_matches('=').trim())
            .filter(|r| !r.is_empty())
            .ok_or_else(|| parse_err(line, format!("expected header field {key}")))?;
        *cursor += 1;
        rest.parse::<usize>()
            .map_err(|_| parse_err(line, format!("{key} must be a non-negative integer")))
    };
    let s = header("s", &mut cursor)?;
    let r = header("r", &mut cursor)?;
    let order = header("p", &mut cursor)?;

    let read_row = |line: usize, text: &str| -> Result<Vec<f64>> {
        text.split_whitespace()
            .map(|tok| parse_number(tok).map_err(|m| parse_err(line, m)))
            .collect()
    };
    let matrix =
        |name: &str, rows: usize, cols: usize, cursor: &mut usize| -> Result<DMatrix<f64>> {
            match lines.get(*cursor) {
                Some(&(_, text)) if text == name => *cursor += 1,
                Some(&(line, text)) => {
                    return Err(parse_err(
                        line,
                        format!("expected matrix {name}, found {text:?}"),
                    ));
                }
                None => return Err(parse_err(last_line, format!("missing matrix {name}"))),
            }
            let mut data = Vec::with_capacity(rows * cols);
            for row in 0..rows {
                let Some(&(line, text)) = lines.get(*cursor) else {
                    return Err(parse_err(
                        last_line,
                        format!("matrix {name}: expected {rows} rows, found {row}"),
                    ));
                };
                let values = read_row(line, text).map_err(|err| match err {
                    Error::Parse { line, message } => Error::Parse {
                        line,
                        message: format!("matrix {name}: {message}; expected {rows} rows"),
                    },
                    other => other,
                })?;
                if values.len() != cols {
                    return Err(parse_err(
                        line,
                        format!(
                            "matrix {name}: expected {rows}x{cols}, row {} has {} entries",
                            row + 1,
                            values.len()
                        ),
                    ));
                }
                data.extend(values);
                *cursor += 1;
            }
            Ok(DMatrix::from_row_slice(rows, cols, &data))
        };
    let a = matrix("A", s, s, &mut cursor)?;
    let u = matrix("U", s, r, &mut cursor)?;
    let b = matrix("B", r, s, &mut cursor)?;
    let v = matrix("V", r, r, &mut cursor)?;

    let starter = match lines.get(cursor) {
        Some(&(_, "starter identity")) => {
            cursor += 1;
            StarterSpec::Identity
        }
        Some(&(_, "starter")) => {
            cursor += 1;
            let mut rows = Vec::with_capacity(r);
            for _ in 0..r {
                let Some(&(line, text)) = lines.get(cursor) else {
                    return Err(parse_err(last_line, format!("starter: expected {r} rows")));
                };
                rows.push(read_row(line, text)?);
                cursor += 1;
            }
            StarterSpec::Derivatives(rows)
        }
        Some(&(line, text)) => {
            return Err(parse_err(
                line,
                format!("expected starter block, found {text:?}"),
            ));
        }
        None => return Err(parse_err(last_line, "missing starter block".into())),
    };
    if let Some(&(line, text)) = lines.get(cursor) {
        return Err(parse_err(
            line,
            format!("unexpected trailing content {text:?}"),
        ));
    }

    let tableau = GlmTableau {
        s,
        r,
        order,
        a,
        u,
        b,
        v,
        starter,
    };
    tableau.validate()?;
    Ok(tableau)
}

/// Writes `tableau` in the file format; entries use the shortest decimal
/// that reads back to the same double, so loading the output reproduces the
/// tableau exactly.
pub fn serialize_glm_tableau(tableau: &GlmTableau) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "s {}\nr {}\np {}", tableau.s, tableau.r, tableau.order);
    for (name, m) in [
        ("A", &tableau.a),
        ("U", &tableau.u),
        ("B", &tableau.b),
        ("V", &tableau.v),
    ] {
        let _ = writeln!(out, "{name}");
        for row in m.row_iter() {
            let cells: Vec<String> = row.iter().map(|x| format!("{x:?}")).collect();
            let _ = writeln!(out, "{}", cells.join(" "));
        }
    }
    match &tableau.starter {
        StarterSpec::Identity => out.push_str("starter identity\n"),
        StarterSpec::Derivatives(rows) => {
            out.push_str("starter\n");
            for row in rows {
                let cells: Vec<String> = row.iter().map(|x| format!("{x:?}")).collect();
                let _ = writeln!(out, "{}", cells.join(" "));
            }
        }
    }
    out
}

/// Finite-difference weights for the `m`-th derivative at `x0` on the
/// given nodes (Fornberg's recursion), for every `m <= max_order`.
fn fd_weights(x0: f64, nodes: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; n]; max_order + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Scaled derivatives `h^j y^(j)(t0)` for `j = 0..=max_order`.
///
/// `j = 0, 1` come from `y0` and `f(t0, y0)` directly. Higher derivatives
/// differentiate `f` along a cGP(2) reference trajectory with step
/// `h / STARTER_REFINEMENT`, run forwards and backwards from `t0` and
/// sampled every `STARTER_STENCIL_STRIDE` substeps.
pub fn scaled_derivatives(
    problem: &OdeProblem,
    h: f64,
    max_order: usize,
    solver: &SolverConfig,
) -> Result<Vec<StateVector>> {
    let t0 = problem.t0();
    let y0 = problem.y0();
    let mut out = vec![y0.to_vec()];
    if max_order == 0 {
        return Ok(out);
    }
    let f0 = problem.rhs(t0, y0)?;
    out.push(f0.iter().map(|v| h * v).collect());
    if max_order == 1 {
        return Ok(out);
    }
    if max_order > 2 * STARTER_HALF_WIDTH + 1 {
        return Err(Error::Config(format!(
            "starter derivatives above order {} are not supported",
            2 * STARTER_HALF_WIDTH + 1
        )));
    }
    let delta = h / STARTER_REFINEMENT as f64;
    let spacing = delta * STARTER_STENCIL_STRIDE as f64;
    let m = STARTER_HALF_WIDTH;
    // f along the reference trajectory at t0 + i spacing, i = -m..=m.
    let mut samples = vec![Vec::new(); 2 * m + 1];
    samples[m] = f0;
    let mut stepper = Cgp2::new(*solver);
    for direction in [1.0, -1.0] {
        let step = direction * delta;
        let mut y = y0.to_vec();
        let mut next = vec![0.0; y.len()];
        let mut t = t0;
        for i in 1..=m {
            for _ in 0..STARTER_STENCIL_STRIDE {
                stepper.advance(problem, t, &y, step, &mut next)?;
                std::mem::swap(&mut y, &mut next);
                t += step;
            }
            let index = if direction > 0.0 { m + i } else { m - i };
            samples[index] = problem.rhs(t0 + direction * i as f64 * spacing, &y)?;
        }
    }
    // Nodes in units of the spacing; the k-th derivative then carries spacing^-k.
    let nodes: Vec<f64> = (0..=2 * m).map(|i| i as f64 - m as f64).collect();
    let weights = fd_weights(0.0, &nodes, max_order - 1);
    let ratio = h / spacing;
    for j in 2..=max_order {
        // h^j y^(j) = h * (h/spacing)^(j-1) * (spacing^(j-1) f^(j-1)).
        let scale = h * ratio.powi(j as i32 - 1);
        let mut component = vec![0.0; y0.len()];
        for (w, f) in weights[j - 1].iter().zip(&samples) {
            for (c, v) in component.iter_mut().zip(f) {
                *c += scale * w * v;
            }
        }
        out.push(component);
    }
    Ok(out)
}

/// Builds the starting input vector for `tableau`.
pub fn start_glm(
    problem: &OdeProblem,
    tableau: &GlmTableau,
    h: f64,
    solver: &SolverConfig,
) -> Result<Vec<StateVector>> {
    tableau.validate()?;
    match &tableau.starter {
        StarterSpec::Identity => Ok(vec![problem.y0().to_vec()]),
        StarterSpec::Derivatives(rows) => {
            let max_order = rows
                .iter()
                .map(|r| r.len().saturating_sub(1))
                .max()
                .unwrap_or(0);
            let derivatives = scaled_derivatives(problem, h, max_order, solver)?;
            let mut inputs: Vec<StateVector> = rows
                .iter()
                .map(|row| {
                    let mut c = vec![0.0; problem.dimension()];
                    for (m, d) in row.iter().zip(&derivatives) {
                        for (ci, di) in c.iter_mut().zip(d) {
                            *ci += m * di;
                        }
                    }
                    c
                })
                .collect();
            inputs[0] = problem.y0().to_vec();
            Ok(inputs)
        }
    }
}

/// General linear method stepper with reusable workspace.
#[derive(Debug, Clone)]
pub struct Glm {
    pub tableau: GlmTableau,
    pub solver: SolverConfig,
    label: String,
    c: Vec<f64>,
    /// `U y_in`, one state per stage.
    base: Vec<f64>,
    /// Stage increments `Y - U y_in`.
    z: Vec<f64>,
    stage: Vec<f64>,
    f: Vec<f64>,
}

impl Glm {
    pub fn new(tableau: GlmTableau, solver: SolverConfig) -> Result<Self> {
        tableau.validate()?;
        Ok(Self {
            c: tableau.abscissae(),
            tableau,
            solver,
            label: "glm".into(),
            base: Vec::new(),
            z: Vec::new(),
            stage: Vec::new(),
            f: Vec::new(),
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Replaces `inputs` (length `r`) with the outputs of one step.
    pub fn advance(
        &mut self,
        problem: &OdeProblem,
        t: f64,
        inputs: &mut [StateVector],
        h: f64,
    ) -> Result<SolveReport> {
        let GlmTableau { s, r, .. } = self.tableau;
        if inputs.len() != r {
            return Err(Error::DimensionMismatch {
                expected: r,
                got: inputs.len(),
            });
        }
        let n = inputs[0].len();
        if let Some(bad) = inputs.iter().find(|v| v.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: bad.len(),
            });
        }
        self.base.clear();
        self.base.resize(s * n, 0.0);
        for i in 0..s {
            let row = &mut self.base[i * n..(i + 1) * n];
            for (j, input) in inputs.iter().enumerate() {
                let w = self.tableau.u[(i, j)];
                if w != 0.0 {
                    for (b, x) in row.iter_mut().zip(input) {
                        *b += w * x;
                    }
                }
            }
        }
        self.z.clear();
        self.z.resize(s * n, 0.0);
        self.stage.resize(n, 0.0);
        self.f.resize(s * n, 0.0);
        let Self {
            tableau,
            solver,
            c,
            base,
            z,
            stage,
            f,
            ..
        } = self;
        let report = solve_stage_fixed_point(
            |z, next| {
                stage_derivatives(problem, t, h, c, base, z, stage, f);
                next.fill(0.0);
                for i in 0..s {
                    let row = &mut next[i * n..(i + 1) * n];
                    for j in 0..s {
                        let w = h * tableau.a[(i, j)];
                        if w != 0.0 {
                            for (x, fj) in row.iter_mut().zip(&f[j * n..(j + 1) * n]) {
                                *x += w * fj;
                            }
                        }
                    }
                }
            },
            z,
            solver,
        )?;
        stage_derivatives(problem, t, h, c, base, z, stage, f);
        let previous: Vec<StateVector> = inputs.to_vec();
        for (i, out) in inputs.iter_mut().enumerate() {
            out.fill(0.0);
            for (j, input) in previous.iter().enumerate() {
                let w = tableau.v[(i, j)];
                if w != 0.0 {
                    for (o, x) in out.iter_mut().zip(input) {
                        *o += w * x;
                    }
                }
            }
            for j in 0..s {
                let w = h * tableau.b[(i, j)];
                if w != 0.0 {
                    for (o, fj) in out.iter_mut().zip(&f[j * n..(j + 1) * n]) {
                        *o += w * fj;
                    }
                }
            }
        }
        Ok(report)
    }
}

#[allow(clippy::too_many_arguments)]
fn stage_derivatives(
    problem: &OdeProblem,
    t: f64,
    h: f64,
    c: &[f64],
    base: &[f64],
    z: &[f64],
    stage: &mut [f64],
    f: &mut [f64],
) {
    let n = stage.len();
    for (i, ci) in c.iter().enumerate() {
        let range = i * n..(i + 1) * n;
        for ((y, b), dz) in stage
            .iter_mut()
            .zip(&base[range.clone()])
            .zip(&z[range.clone()])
        {
            *y = b + dz;
        }
        problem.rhs_into(t + ci * h, stage, &mut f[range]);
    }
}

impl Stepper for Glm {
    fn label(&self) -> String {
        self.label.clone()
    }

    fn start(&mut self, problem: &OdeProblem, h: f64) -> Result<Vec<StateVector>> {
        start_glm(problem, &self.tableau, h, &self.solver)
    }

    fn step(
        &mut self,
        problem: &OdeProblem,
        t: f64,
        inputs: &mut [StateVector],
        h: f64,
    ) -> Result<usize> {
        Ok(self.advance(problem, t, inputs, h)?.iterations)
    }
}

/// One step of `tableau` from `inputs`, returning the new input vector.
pub fn step_glm(
    problem: &OdeProblem,
    t: f64,
    inputs: &[StateVector],
    h: f64,
    tableau: &GlmTableau,
    solver: &SolverConfig,
) -> Result<Vec<StateVector>> {
    let mut out = inputs.to_vec();
    Glm::new(tableau.clone(), *solver)?.advance(problem, t, &mut out, h)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::irk::Irk;
    use crate::problems::make_sho;

    fn decay() -> OdeProblem {
        OdeProblem::new("decay", vec![1.0], |_, y, out| out[0] = -y[0])
    }

    #[test]
    fn explicit_euler_as_glm() {
        let out = step_glm(
            &decay(),
            0.0,
            &[vec![1.0]],
            0.1,
            &GlmTableau::euler(),
            &SolverConfig::default(),
        )
        .unwrap();
        assert_eq!(out, vec![vec![0.9]]);
    }

    #[test]
    fn zero_rhs_with_identity_v_keeps_inputs() {
        let zero = OdeProblem::new("zero", vec![0.0, 0.0], |_, _, out| out.fill(0.0));
        let mut t = GlmTableau::gauss2();
        t.r = 2;
        t.u = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 1.0, -0.5]);
        t.b = DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.25, -0.25]);
        t.v = DMatrix::identity(2, 2);
        t.starter = StarterSpec::Derivatives(vec![vec![1.0], vec![0.0, 1.0]]);
        let inputs = vec![vec![1.0, -2.0], vec![0.3, 0.7]];
        let out = step_glm(&zero, 0.0, &inputs, 0.1, &t, &SolverConfig::default()).unwrap();
        assert_eq!(out, inputs);
    }

    #[test]
    fn gauss2_embedding_matches_irk_step() {
        let sho = make_sho();
        let solver = SolverConfig::default();
        let mut irk = Irk::gauss2(solver);
        let mut expected = vec![0.0; 2];
        irk.advance(&sho, 0.0, sho.y0(), 0.1, &mut expected)
            .unwrap();
        let out = step_glm(
            &sho,
            0.0,
            &[sho.y0().to_vec()],
            0.1,
            &GlmTableau::gauss2(),
            &solver,
        )
        .unwrap();
        for (a, b) in out[0].iter().zip(&expected) {
            assert!((a - b).abs() <= 1e-15, "{a} vs {b}");
        }
    }

    #[test]
    fn rational_and_decimal_literals() {
        assert_eq!(parse_number("1/3").unwrap(), 1.0 / 3.0);
        assert_eq!(parse_number("-3/4").unwrap(), -0.75);
        assert_eq!(parse_number("0.25").unwrap(), 0.25);
        assert!(parse_number("1/0").is_err());
        assert!(parse_number("x").is_err());
        assert!(parse_number("1/2/3").is_err());
        assert!(parse_number("inf").is_err());
    }

    #[test]
    fn fornberg_weights_match_central_differences() {
        let w = fd_weights(0.0, &[-1.0, 0.0, 1.0], 2);
        assert_eq!(w[0], vec![0.0, 1.0, 0.0]);
        assert_eq!(w[1], vec![-0.5, 0.0, 0.5]);
        assert_eq!(w[2], vec![1.0, -2.0, 1.0]);
    }

    #[test]
    fn v_power_growth_detects_jordan_blocks() {
        assert_eq!(v_power_growth(&DMatrix::identity(2, 2), 100), 1.0);
        let jordan = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert_eq!(v_power_growth(&jordan, 100), 101.0);
        let rotation = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        assert_eq!(v_power_growth(&rotation, 10_000), 1.0);
    }
}
