//! Simple harmonic oscillator with `k = m = 1`: `H = (p^2 + q^2) / 2`.

use crate::model::{OdeProblem, Separable};

/// Oscillator started from `(p, q) = (0, 1)`.
pub fn make_sho() -> OdeProblem {
    make_sho_from(0.0, 1.0)
}

pub fn make_sho_from(p0: f64, q0: f64) -> OdeProblem {
    OdeProblem::new("sho", vec![p0, q0], |_, y, out| {
        out[0] = -y[1];
        out[1] = y[0];
    })
    .with_hamiltonian(|y| 0.5 * (y[0] * y[0] + y[1] * y[1]))
    .with_exact(move |t| {
        let (s, c) = t.sin_cos();
        vec![p0 * c - q0 * s, q0 * c + p0 * s]
    })
    .with_separable(Separable::new(
        |p, out| out.copy_from_slice(p),
        |q, out| out.copy_from_slice(q),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn initial_energy_and_equations_of_motion() {
        let sho = make_sho();
        assert_eq!(sho.dimension(), 2);
        assert_eq!(sho.hamiltonian(sho.y0()), Some(0.5));
        assert_eq!(sho.rhs(0.0, &[0.0, 1.0]).unwrap(), vec![-1.0, 0.0]);
        let quarter = sho.exact(PI / 2.0).unwrap();
        assert!((quarter[0] + 1.0).abs() < 1e-16 && quarter[1].abs() < 1e-16);
    }

    #[test]
    fn exact_solution_satisfies_the_ode() {
        let sho = make_sho_from(0.3, -0.8);
        let delta = 1e-5;
        for &t in &[0.0, 0.7, 2.5, 10.0] {
            let plus = sho.exact(t + delta).unwrap();
            let minus = sho.exact(t - delta).unwrap();
            let f = sho.rhs(t, &sho.exact(t).unwrap()).unwrap();
            for i in 0..2 {
                let fd = (plus[i] - minus[i]) / (2.0 * delta);
                assert!((fd - f[i]).abs() < 1e-9);
            }
        }
    }
}
