//! Frozen Argon crystal: seven atoms in the plane interacting through a
//! Lennard-Jones pair potential `V(r) = 4ε((σ/r)^12 - (σ/r)^6)`.
//!
//! Internal units are nanometres for length, nanoseconds for time and the
//! argon atomic mass for mass. Energies are therefore measured in
//! `m_Ar nm^2 / ns^2`; relative energy errors are unit independent. Times
//! are presented in femtoseconds (`1 fsec = 1e-6 ns`).

use crate::error::{Error, Result};
use crate::model::{phase_state, split_phase, OdeProblem, Separable, TimeUnit};

pub const ATOMS: usize = 7;
pub const ARGON_MASS_KG: f64 = 66.34e-27;
pub const SIGMA_NM: f64 = 0.341;
pub const EPSILON_J: f64 = 1.654_028_284e-21;
/// Internal time units (ns) per femtosecond.
pub const FSEC: f64 = 1e-6;

const DEFAULT_DATA: &str = include_str!("../../data/argon7.txt");

#[derive(Debug, Clone, PartialEq)]
pub struct ArgonConfig {
    /// Atomic masses in kg.
    pub masses: [f64; ATOMS],
    /// Lennard-Jones length scale in nm.
    pub sigma: f64,
    /// Lennard-Jones well depth in J.
    pub epsilon: f64,
    /// Initial positions in nm.
    pub positions: [[f64; 2]; ATOMS],
    /// Initial velocities in nm/ns.
    pub velocities: [[f64; 2]; ATOMS],
}

impl Default for ArgonConfig {
    fn default() -> Self {
        Self::from_data(DEFAULT_DATA).expect("bundled argon data is well formed")
    }
}

impl ArgonConfig {
    /// Parses the initial-condition file: seven rows of
    /// `q_x q_y v_x v_y` (nm, nm, nm/ns, nm/ns). `#` starts a comment.
    pub fn from_data(text: &str) -> Result<Self> {
        let mut positions = [[0.0; 2]; ATOMS];
        let mut velocities = [[0.0; 2]; ATOMS];
        let mut atom = 0;
        for (index, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                line: index + 1,
                message,
            };
            if atom == ATOMS {
                return Err(parse_err(format!("more than {ATOMS} atoms")));
            }
            let values = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>()
                        .map_err(|_| parse_err(format!("not a number: {tok:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            if values.len() != 4 {
                return Err(parse_err(format!(
                    "expected 4 columns, found {}",
                    values.len()
                )));
            }
            positions[atom] = [values[0], values[1]];
            velocities[atom] = [values[2], values[3]];
            atom += 1;
        }
        if atom != ATOMS {
            return Err(Error::Parse {
                line: text.lines().count(),
                message: format!("expected {ATOMS} atoms, found {atom}"),
            });
        }
        Ok(Self {
            masses: [ARGON_MASS_KG; ATOMS],
            sigma: SIGMA_NM,
            epsilon: EPSILON_J,
            positions,
            velocities,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.masses.iter().any(|m| !(*m > 0.0)) || !(self.sigma > 0.0) || !(self.epsilon > 0.0) {
            return Err(Error::Config("argon constants must be positive".into()));
        }
        for i in 0..ATOMS {
            for j in 0..i {
                let [a, b] = self.positions[i];
                let [c, d] = self.positions[j];
                if (a - c).hypot(b - d) == 0.0 {
                    return Err(Error::Config(format!("atoms {j} and {i} coincide")));
                }
            }
        }
        Ok(())
    }
}

/// Lennard-Jones pair interaction in internal units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LennardJones {
    pub sigma: f64,
    pub epsilon: f64,
}

impl LennardJones {
    pub fn potential(&self, r: f64) -> f64 {
        let s6 = (self.sigma / r).powi(6);
        4.0 * self.epsilon * (s6 * s6 - s6)
    }

    /// `dV/dr`.
    pub fn derivative(&self, r: f64) -> f64 {
        let s6 = (self.sigma / r).powi(6);
        4.0 * self.epsilon * (-12.0 * s6 * s6 + 6.0 * s6) / r
    }

    /// Force on atom `i` from atom `j` for `d = q_j - q_i`:
    /// `24 ε σ^6 (d / r^8 - 2 σ^6 d / r^14)`.
    #[inline]
    pub fn pair_force(&self, d: [f64; 2]) -> [f64; 2] {
        let s6 = self.sigma.powi(6);
        let r2 = d[0] * d[0] + d[1] * d[1];
        let r8 = r2 * r2 * r2 * r2;
        let r14 = r8 * r2 * r2 * r2;
        let scale = 24.0 * self.epsilon * s6 * (1.0 / r8 - 2.0 * s6 / r14);
        [scale * d[0], scale * d[1]]
    }
}

/// Total pair potential of the configuration `q` (length `2 * ATOMS`).
pub fn potential_energy(lj: &LennardJones, q: &[f64]) -> f64 {
    let mut v = 0.0;
    for i in 1..ATOMS {
        for j in 0..i {
            let r = (q[2 * i] - q[2 * j]).hypot(q[2 * i + 1] - q[2 * j + 1]);
            v += lj.potential(r);
        }
    }
    v
}

/// Sum of all momenta `(P_x, P_y)` of a `(p, q)` state.
pub fn total_momentum(y: &[f64]) -> [f64; 2] {
    let (p, _) = split_phase(y);
    p.chunks(2)
        .fold([0.0, 0.0], |acc, c| [acc[0] + c[0], acc[1] + c[1]])
}

/// Builds the 28-dimensional `(p, q)` system.
pub fn make_argon7(config: &ArgonConfig) -> Result<OdeProblem> {
    config.validate()?;
    let masses: Vec<f64> = config.masses.iter().map(|m| m / ARGON_MASS_KG).collect();
    let lj = LennardJones {
        sigma: config.sigma,
        epsilon: config.epsilon / ARGON_MASS_KG,
    };
    let q0: Vec<f64> = config.positions.iter().flatten().copied().collect();
    let p0: Vec<f64> = config
        .velocities
        .iter()
        .zip(&masses)
        .flat_map(|(v, m)| [m * v[0], m * v[1]])
        .collect();
    let n = 2 * ATOMS;

    let rhs_masses = masses.clone();
    let rhs = move |_t: f64, y: &[f64], out: &mut [f64]| {
        let (p, q) = split_phase(y);
        let (dp, dq) = out.split_at_mut(n);
        dp.fill(0.0);
        for i in 0..ATOMS {
            for j in (i + 1)..ATOMS {
                let d = [q[2 * j] - q[2 * i], q[2 * j + 1] - q[2 * i + 1]];
                let f = lj.pair_force(d);
                dp[2 * i] += f[0];
                dp[2 * i + 1] += f[1];
                dp[2 * j] -= f[0];
                dp[2 * j + 1] -= f[1];
            }
            dq[2 * i] = p[2 * i] / rhs_masses[i];
            dq[2 * i + 1] = p[2 * i + 1] / rhs_masses[i];
        }
    };

    let kinetic_masses = masses.clone();
    let kinetic = move |p: &[f64], out: &mut [f64]| {
        for (i, (o, v)) in out.iter_mut().zip(p).enumerate() {
            *o = v / kinetic_masses[i / 2];
        }
    };
    let potential = move |q: &[f64], out: &mut [f64]| {
        out.fill(0.0);
        for i in 1..ATOMS {
            for j in 0..i {
                let dx = q[2 * i] - q[2 * j];
                let dy = q[2 * i + 1] - q[2 * j + 1];
                let r = dx.hypot(dy);
                let g = lj.derivative(r) / r;
                out[2 * i] += g * dx;
                out[2 * i + 1] += g * dy;
                out[2 * j] -= g * dx;
                out[2 * j + 1] -= g * dy;
            }
        }
    };

    let energy_masses = masses;
    let hamiltonian = move |y: &[f64]| {
        let (p, q) = split_phase(y);
        let kinetic: f64 = p
            .iter()
            .enumerate()
            .map(|(i, v)| v * v / energy_masses[i / 2])
            .sum();
        0.5 * kinetic + potential_energy(&lj, q)
    };

    Ok(OdeProblem::new("argon7", phase_state(&p0, &q0), rhs)
        .with_hamiltonian(hamiltonian)
        .with_separable(Separable::new(kinetic, potential))
        .with_time_unit(TimeUnit {
            label: "fsec",
            scale: FSEC,
        }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_configuration() {
        let c = ArgonConfig::default();
        assert_eq!(c.positions[0], [0.0, 0.02]);
        assert_eq!(c.velocities[6], [-80.0, -60.0]);
        let argon = make_argon7(&c).unwrap();
        assert_eq!(argon.dimension(), 28);
        // Bound crystal.
        assert!(argon.hamiltonian(argon.y0()).unwrap() < 0.0);
        let m = total_momentum(argon.y0());
        assert_eq!(m, [0.0, 0.0]);
    }

    #[test]
    fn lennard_jones_closed_forms() {
        let lj = LennardJones {
            sigma: SIGMA_NM,
            epsilon: 2.0,
        };
        assert_eq!(lj.potential(SIGMA_NM), 0.0);
        let r_min = SIGMA_NM * 2.0_f64.powf(1.0 / 6.0);
        let f = lj.pair_force([r_min, 0.0]);
        assert!(f[0].abs() < 1e-12 * lj.epsilon / SIGMA_NM, "{f:?}");
        assert!((lj.potential(r_min) + lj.epsilon).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_configurations() {
        let mut c = ArgonConfig::default();
        c.positions[3] = c.positions[1];
        assert!(make_argon7(&c).is_err());
        let c = ArgonConfig {
            sigma: 0.0,
            ..ArgonConfig::default()
        };
        assert!(make_argon7(&c).is_err());
        assert!(ArgonConfig::from_data("1 2 3 4\n").is_err());
        assert!(matches!(
            ArgonConfig::from_data("1 2 3\n"),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn forces_sum_to_zero() {
        let argon = make_argon7(&ArgonConfig::default()).unwrap();
        let f = argon.rhs(0.0, argon.y0()).unwrap();
        let total = total_momentum(&f);
        let scale: f64 = f[..14].iter().map(|v| v.abs()).sum();
        assert!(total[0].abs() < 1e-13 * scale && total[1].abs() < 1e-13 * scale);
    }

    #[test]
    fn split_and_direct_rhs_agree() {
        let argon = make_argon7(&ArgonConfig::default()).unwrap();
        let a = argon.rhs(0.0, argon.y0()).unwrap();
        let b = argon.evaluate_split_rhs(argon.y0()).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0), "{x} vs {y}");
        }
    }
}
