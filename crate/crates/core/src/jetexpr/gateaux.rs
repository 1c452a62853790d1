//! Numerical cross-check of the Euler derivative against the defining
//! directional derivative `d/dε ℋ[x + εη]` at `ε = 0`.

use serde::Serialize;
use thiserror::Error;

use super::{DensityProfile, JetVar};
use crate::field::SmoothField;
use crate::grid::{Grid, GridError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GateauxError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("density refers to state {needed} but only {given} state fields were given")]
    MissingState { needed: usize, given: usize },
    #[error("expected {expected} test functions, got {found}")]
    TestFunctionCount { expected: usize, found: usize },
    #[error("test function {state} has derivative {order} equal to {value:e} at z = {z}; it must vanish at the boundary")]
    NotCompactlySupported {
        state: usize,
        order: usize,
        z: f64,
        value: f64,
    },
    #[error("empty step sweep")]
    EmptySweep,
}

#[derive(Clone, Debug, Serialize)]
pub struct GateauxStep {
    pub epsilon: f64,
    pub difference_quotient: f64,
    pub relative_error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GateauxReport {
    /// `∫ ⟨δℋ, η⟩ dz` from the symbolic Euler derivative.
    pub pairing: f64,
    pub steps: Vec<GateauxStep>,
    pub best_relative_error: f64,
}

fn functional<F: SmoothField>(
    d: &DensityProfile,
    grid: &Grid,
    states: &[F],
    eta: &[F],
    eps: f64,
) -> f64 {
    let samples: Vec<f64> = grid
        .points()
        .iter()
        .map(|&z| {
            d.density().eval(z, |v: JetVar| {
                let i = v.state() - 1;
                states[i].derivative(v.order(), z) + eps * eta[i].derivative(v.order(), z)
            })
        })
        .collect();
    grid.integrate(&samples)
}

/// Compares `∫⟨δℋ(x), η⟩` (trapezoidal quadrature of the symbolic Euler
/// derivative) with centered differences of `ε ↦ ℋ[x + εη]`.
pub fn check_euler_vs_gateaux<F: SmoothField>(
    d: &DensityProfile,
    grid: &Grid,
    states: &[F],
    eta: &[F],
    epsilons: &[f64],
) -> Result<GateauxReport, GateauxError> {
    if epsilons.is_empty() {
        return Err(GateauxError::EmptySweep);
    }
    let n = states.len();
    if d.max_state() > n {
        return Err(GateauxError::MissingState {
            needed: d.max_state(),
            given: n,
        });
    }
    if eta.len() != n {
        return Err(GateauxError::TestFunctionCount {
            expected: n,
            found: eta.len(),
        });
    }
    let md = d.max_order();
    grid.check_order(2 * md)?;

    let zs = grid.points();
    let scale = eta
        .iter()
        .flat_map(|e| zs.iter().map(move |&z| e.value(z).abs()))
        .fold(1.0_f64, f64::max);
    for (i, e) in eta.iter().enumerate() {
        for order in 0..=md {
            for z in [grid.a(), grid.b()] {
                let value = e.derivative(order, z);
                if value.abs() > 1e-12 * scale {
                    return Err(GateauxError::NotCompactlySupported {
                        state: i + 1,
                        order,
                        z,
                        value,
                    });
                }
            }
        }
    }

    let gradient = d.euler_gradient(n);
    let integrand: Vec<f64> = zs
        .iter()
        .map(|&z| {
            gradient
                .iter()
                .enumerate()
                .map(|(i, g)| {
                    let e = g.eval(z, |v| states[v.state() - 1].derivative(v.order(), z));
                    e * eta[i].value(z)
                })
                .sum()
        })
        .collect();
    let pairing = grid.integrate(&integrand);

    let steps: Vec<GateauxStep> = epsilons
        .iter()
        .map(|&eps| {
            let plus = functional(d, grid, states, eta, eps);
            let minus = functional(d, grid, states, eta, -eps);
            let quotient = (plus - minus) / (2.0 * eps);
            let denom = pairing.abs().max(quotient.abs());
            let relative_error = if denom < 1e-300 {
                0.0
            } else {
                (quotient - pairing).abs() / denom
            };
            GateauxStep {
                epsilon: eps,
                difference_quotient: quotient,
                relative_error,
            }
        })
        .collect();
    let best_relative_error = steps
        .iter()
        .map(|s| s.relative_error)
        .fold(f64::INFINITY, f64::min);
    Ok(GateauxReport {
        pairing,
        steps,
        best_relative_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Profile;
    use crate::jetexpr::{int, rat, JetPolynomial};

    fn u(i: usize, j: usize) -> JetPolynomial {
        JetPolynomial::u(i, j)
    }

    fn kdv() -> DensityProfile {
        DensityProfile::new(u(1, 1).pow(2).scale(&rat(-1, 2)) + u(1, 0).pow(3).scale(&rat(1, 6)))
    }

    #[test]
    fn kdv_matches_difference_quotient() {
        let grid = Grid::bounded(0.0, 1.0, 401).unwrap();
        let x = [Profile::sine(0.8, 2.0, 0.3).plus(Profile::Constant(0.2))];
        let eta = [Profile::bump(0.5, 0.35, 8, 1.0)];
        let r = check_euler_vs_gateaux(&kdv(), &grid, &x, &eta, &[1e-3, 1e-4]).unwrap();
        assert!(r.best_relative_error <= 1e-6, "{r:?}");
    }

    #[test]
    fn quadratic_density_is_exact_in_epsilon() {
        let d = DensityProfile::new(u(1, 1).pow(2) + u(1, 0).pow(2).scale(&int(3)));
        let grid = Grid::bounded(0.0, 1.0, 201).unwrap();
        let x = [Profile::Polynomial(vec![0.1, 1.0, -2.0])];
        let eta = [Profile::bump(0.4, 0.3, 8, 1.0)];
        let r = check_euler_vs_gateaux(&d, &grid, &x, &eta, &[1.0, 1e-2]).unwrap();
        // a large step is as good as a small one
        assert!(r.steps[0].relative_error < 1e-9, "{r:?}");
    }

    #[test]
    fn zero_density_is_zero_on_both_sides() {
        let d = DensityProfile::new(JetPolynomial::zero());
        let grid = Grid::bounded(0.0, 1.0, 51).unwrap();
        let x = [Profile::Constant(1.0)];
        let eta = [Profile::bump(0.5, 0.2, 4, 1.0)];
        let r = check_euler_vs_gateaux(&d, &grid, &x, &eta, &[1e-3]).unwrap();
        assert_eq!(r.pairing, 0.0);
        assert_eq!(r.best_relative_error, 0.0);
    }

    #[test]
    fn rejects_coarse_grid_and_bad_test_function() {
        let grid = Grid::bounded(0.0, 1.0, 6).unwrap();
        let x = [Profile::Constant(1.0)];
        let eta = [Profile::bump(0.5, 0.2, 4, 1.0)];
        assert!(matches!(
            check_euler_vs_gateaux(&kdv(), &grid, &x, &eta, &[1e-3]),
            Err(GateauxError::Grid(_))
        ));
        let grid = Grid::bounded(0.0, 1.0, 101).unwrap();
        let eta = [Profile::sine(1.0, 1.0, 0.5)];
        assert!(matches!(
            check_euler_vs_gateaux(&kdv(), &grid, &x, &eta, &[1e-3]),
            Err(GateauxError::NotCompactlySupported { .. })
        ));
    }
}
