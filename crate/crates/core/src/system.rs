//! Assembled Hamiltonian and dissipative Hamiltonian systems.

use nalgebra::{DMatrix, SymmetricEigen};
use thiserror::Error;

use crate::jetexpr::{DensityProfile, JetPolynomial};
use crate::opalg::MatDiffOp;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SystemError {
    #[error("operator must be {n}x{n}, found {rows}x{cols}")]
    OperatorShape { n: usize, rows: usize, cols: usize },
    #[error("operator is not formally skew-adjoint")]
    NotSkew,
    #[error("density refers to state {state} but the system has {n} states")]
    DensityState { state: usize, n: usize },
    #[error("dissipation operator must have {n} rows, found {rows}")]
    DissipationRows { n: usize, rows: usize },
    #[error("resistive map must be {d}x{d}")]
    ResistanceShape { d: usize },
    #[error("resistive map may depend on z only")]
    ResistanceNotSpatial,
    #[error("resistive map is not positive semidefinite at z = {z} (smallest eigenvalue {min_eigenvalue:e})")]
    ResistanceIndefinite { z: f64, min_eigenvalue: f64 },
}

/// Pointwise resistive map `R(z)`, a square matrix of polynomials in `z`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Resistance {
    entries: Vec<Vec<JetPolynomial>>,
}

impl Resistance {
    pub fn new(entries: Vec<Vec<JetPolynomial>>) -> Result<Self, SystemError> {
        let d = entries.len();
        if entries.iter().any(|row| row.len() != d) {
            return Err(SystemError::ResistanceShape { d });
        }
        if entries.iter().flatten().any(|p| !p.is_z_only()) {
            return Err(SystemError::ResistanceNotSpatial);
        }
        Ok(Resistance { entries })
    }

    pub fn scalar(r: JetPolynomial) -> Result<Self, SystemError> {
        Self::new(vec![vec![r]])
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Vec<JetPolynomial>] {
        &self.entries
    }

    pub fn eval(&self, z: f64) -> DMatrix<f64> {
        let d = self.dim();
        DMatrix::from_fn(d, d, |i, j| self.entries[i][j].eval(z, |_| 0.0))
    }

    /// Smallest eigenvalue of the symmetric part of `R(z)`.
    pub fn min_eigenvalue(&self, z: f64) -> f64 {
        let r = self.eval(z);
        if r.is_empty() {
            return 0.0;
        }
        let sym = (&r + r.transpose()) * 0.5;
        SymmetricEigen::new(sym).eigenvalues.min()
    }

    /// Samples `R` at `samples` uniform points of `[a, b]` and rejects negative
    /// eigenvalues of its symmetric part.
    pub fn check_nonnegative(&self, a: f64, b: f64, samples: usize) -> Result<(), SystemError> {
        let samples = samples.max(2);
        for k in 0..samples {
            let z = a + (b - a) * k as f64 / (samples - 1) as f64;
            let min_eigenvalue = self.min_eigenvalue(z);
            if min_eigenvalue < -1e-12 {
                return Err(SystemError::ResistanceIndefinite { z, min_eigenvalue });
            }
        }
        Ok(())
    }
}

/// `𝒢ᵣ R 𝒢ᵣ*` data: `g` is `n × d_g`, `r` is `d_g × d_g`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dissipation {
    pub g: MatDiffOp,
    pub r: Resistance,
}

/// `ẋ = (𝒥 − 𝒢ᵣR𝒢ᵣ*) δℋ`, or `ẋ = 𝒥 δℋ` without dissipation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhsSystem {
    n: usize,
    j: MatDiffOp,
    density: DensityProfile,
    dissipation: Option<Dissipation>,
}

impl PhsSystem {
    pub fn new(j: MatDiffOp, density: DensityProfile) -> Result<Self, SystemError> {
        let n = j.rows();
        if j.cols() != n {
            return Err(SystemError::OperatorShape {
                n,
                rows: j.rows(),
                cols: j.cols(),
            });
        }
        if !j.is_skew_adjoint() {
            return Err(SystemError::NotSkew);
        }
        if density.max_state() > n {
            return Err(SystemError::DensityState {
                state: density.max_state(),
                n,
            });
        }
        Ok(PhsSystem {
            n,
            j,
            density,
            dissipation: None,
        })
    }

    pub fn with_dissipation(mut self, dissipation: Dissipation) -> Result<Self, SystemError> {
        if dissipation.g.rows() != self.n {
            return Err(SystemError::DissipationRows {
                n: self.n,
                rows: dissipation.g.rows(),
            });
        }
        if dissipation.r.dim() != dissipation.g.cols() {
            return Err(SystemError::ResistanceShape {
                d: dissipation.g.cols(),
            });
        }
        self.dissipation = Some(dissipation);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn operator(&self) -> &MatDiffOp {
        &self.j
    }

    pub fn density(&self) -> &DensityProfile {
        &self.density
    }

    pub fn dissipation(&self) -> Option<&Dissipation> {
        self.dissipation.as_ref()
    }

    /// `δℋ`, one Euler derivative per state.
    pub fn efforts(&self) -> Vec<JetPolynomial> {
        self.density.euler_gradient(self.n)
    }

    /// Symbolic right-hand side `(𝒥 − 𝒢ᵣR𝒢ᵣ*) δℋ`.
    pub fn rhs_symbolic(&self) -> Vec<JetPolynomial> {
        let e = self.efforts();
        let mut out = self.j.apply(&e).expect("square operator");
        if let Some(diss) = &self.dissipation {
            let f = diss.g.formal_adjoint().apply(&e).expect("shape checked");
            let phi: Vec<JetPolynomial> = diss
                .r
                .entries()
                .iter()
                .map(|row| {
                    row.iter()
                        .zip(&f)
                        .fold(JetPolynomial::zero(), |acc, (rij, fj)| acc + rij * fj)
                })
                .collect();
            let g_phi = diss.g.apply(&phi).expect("shape checked");
            for (o, v) in out.iter_mut().zip(g_phi) {
                *o -= &v;
            }
        }
        out
    }
}
