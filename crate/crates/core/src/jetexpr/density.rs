use std::collections::BTreeSet;

use super::{JetPolynomial, JetVar};

/// A Hamiltonian density together with the jet variables it depends on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DensityProfile {
    density: JetPolynomial,
    max_order: usize,
    support: BTreeSet<JetVar>,
}

impl DensityProfile {
    pub fn new(density: JetPolynomial) -> Self {
        // canonical form: every occurring variable has a nonzero partial
        let support = density.variables();
        let max_order = support.iter().map(|v| v.order()).max().unwrap_or(0);
        DensityProfile {
            density,
            max_order,
            support,
        }
    }

    pub fn density(&self) -> &JetPolynomial {
        &self.density
    }

    /// Highest derivative order `m_d` occurring in the density.
    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn support(&self) -> &BTreeSet<JetVar> {
        &self.support
    }

    /// Largest state index the density refers to (0 for a state-free density).
    pub fn max_state(&self) -> usize {
        self.support.iter().map(|v| v.state()).max().unwrap_or(0)
    }

    pub fn euler_derivative(&self, state: usize) -> JetPolynomial {
        euler_derivative(self, state)
    }

    /// Euler derivatives for states `1..=n`.
    pub fn euler_gradient(&self, n: usize) -> Vec<JetPolynomial> {
        (1..=n).map(|i| euler_derivative(self, i)).collect()
    }
}

/// Variational derivative `Σ_{j≥0} (−D_z)^j ∂H/∂u_{i,j}`.
///
/// The sum starts at `j = 0`; dropping that term would lose every
/// derivative-free contribution (e.g. the kinetic part of a rod).
pub fn euler_derivative(d: &DensityProfile, state: usize) -> JetPolynomial {
    assert!(state >= 1, "state index is 1-based");
    let mut out = JetPolynomial::zero();
    for j in 0..=d.max_order {
        let partial = d.density.partial(JetVar::new(state, j));
        if partial.is_zero() {
            continue;
        }
        let mut term = partial.total_derivative_n(j);
        if j % 2 == 1 {
            term = -term;
        }
        out += term;
    }
    out
}
