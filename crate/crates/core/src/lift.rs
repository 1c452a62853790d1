//! Jet-space lift of Hamiltonian and dissipative Hamiltonian systems.
//!
//! A [`LiftSpec`] lists the jet coordinates `x̄_k = ∂z^{j_k} x_{i_k}` that become
//! independent states. The lifted operator is `𝕁 = D₊ ∘ 𝒥_sub ∘ D₋` with
//! `D± = diag((±∂z)^{j_k})`; the closed-form coefficient formulas are provided
//! as independent cross-checks.

use std::collections::BTreeSet;
use std::fmt;

use num::{BigRational, One};
use thiserror::Error;

use crate::jetexpr::{DensityProfile, JetPolynomial, JetVar};
use crate::matrix::RatMatrix;
use crate::opalg::{MatDiffOp, OpError};
use crate::system::{Dissipation, PhsSystem, Resistance, SystemError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LiftError {
    #[error(transparent)]
    Op(#[from] OpError),
    #[error(transparent)]
    System(#[from] SystemError),
    #[error("lift entry {0} is listed twice")]
    DuplicateEntry(JetVar),
    #[error("lift entry {var} refers to a state beyond n = {n}")]
    StateOutOfRange { var: JetVar, n: usize },
    #[error("density depends on {0}, which is not in the lift")]
    MissingSupport(JetVar),
    #[error("system has no dissipation")]
    NotDissipative,
}

/// Ordered index set `ℐ`, sorted by derivative order and then by state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiftSpec {
    entries: Vec<JetVar>,
}

fn sign(odd: bool) -> BigRational {
    if odd {
        -BigRational::one()
    } else {
        BigRational::one()
    }
}

impl LiftSpec {
    pub fn new(entries: impl IntoIterator<Item = JetVar>) -> Result<Self, LiftError> {
        let mut entries: Vec<JetVar> = entries.into_iter().collect();
        entries.sort_by_key(|v| (v.order(), v.state()));
        if let Some(w) = entries.windows(2).find(|w| w[0] == w[1]) {
            return Err(LiftError::DuplicateEntry(w[0]));
        }
        Ok(LiftSpec { entries })
    }

    /// `{(i, 0)}` for `i ∈ [1:n]`: the identity embedding.
    pub fn identity(n: usize) -> Self {
        LiftSpec {
            entries: (1..=n).map(|i| JetVar::new(i, 0)).collect(),
        }
    }

    pub fn entries(&self) -> &[JetVar] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `j_l`, the largest derivative order in the lift.
    pub fn max_order(&self) -> usize {
        self.entries.iter().map(|v| v.order()).max().unwrap_or(0)
    }

    pub fn is_identity(&self) -> bool {
        self.max_order() == 0
    }

    /// 0-based position of `v` among the entries.
    pub fn position(&self, v: JetVar) -> Option<usize> {
        self.entries.iter().position(|&e| e == v)
    }

    /// 0-based original state index of each entry.
    pub fn state_rows(&self) -> Vec<usize> {
        self.entries.iter().map(|v| v.state() - 1).collect()
    }

    fn check_states(&self, n: usize) -> Result<(), LiftError> {
        match self.entries.iter().find(|v| v.state() > n) {
            Some(&var) => Err(LiftError::StateOutOfRange { var, n }),
            None => Ok(()),
        }
    }

    /// `D₊ = diag(∂z^{j_k})`.
    pub fn d_plus(&self) -> MatDiffOp {
        self.multiplier(false)
    }

    /// `D₋ = diag((−∂z)^{j_k})`.
    pub fn d_minus(&self) -> MatDiffOp {
        self.multiplier(true)
    }

    fn multiplier(&self, negative: bool) -> MatDiffOp {
        let polys: Vec<_> = self
            .entries
            .iter()
            .map(|v| MatDiffOp::power_poly(v.order(), negative))
            .collect();
        MatDiffOp::diagonal(&polys)
    }

    /// Renames every `∂z^{j_k} x_{i_k}` to the lifted coordinate `x̄_k`.
    pub fn lift_poly(&self, p: &JetPolynomial) -> Result<JetPolynomial, LiftError> {
        if let Some(&v) = p.variables().iter().find(|v| self.position(**v).is_none()) {
            return Err(LiftError::MissingSupport(v));
        }
        Ok(p.substitute(|v| JetPolynomial::u(self.position(v).expect("checked") + 1, 0)))
    }

    /// Evaluates a polynomial in lifted jet variables at the prolonged
    /// original state: `∂z^r x̄_k ↦ ∂z^{j_k + r} x_{i_k}`.
    pub fn prolong(&self, p: &JetPolynomial) -> JetPolynomial {
        p.substitute(|v| {
            let e = self.entries[v.state() - 1];
            JetPolynomial::u(e.state(), e.order() + v.order())
        })
    }
}

impl fmt::Display for LiftSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .entries
            .iter()
            .map(|v| format!("({},{})", v.state(), v.order()))
            .collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// Support of the density together with every zero-order coordinate.
pub fn infer_lift_spec(d: &DensityProfile, n: usize) -> LiftSpec {
    let mut set: BTreeSet<JetVar> = d.support().iter().copied().collect();
    set.extend((1..=n).map(|i| JetVar::new(i, 0)));
    LiftSpec::new(set).expect("set has no duplicates")
}

#[derive(Clone, Debug, PartialEq)]
pub struct LiftedSystem {
    pub spec: LiftSpec,
    pub j_bar: MatDiffOp,
    pub density_bar: DensityProfile,
    pub d_plus: MatDiffOp,
    pub d_minus: MatDiffOp,
}

impl LiftedSystem {
    pub fn to_system(&self) -> PhsSystem {
        PhsSystem::new(self.j_bar.clone(), self.density_bar.clone())
            .expect("lifted operator is skew-adjoint")
    }
}

fn check_lift(system: &PhsSystem, spec: &LiftSpec) -> Result<(), LiftError> {
    spec.check_states(system.n())?;
    if let Some(&v) = system
        .density()
        .support()
        .iter()
        .find(|v| spec.position(**v).is_none())
    {
        return Err(LiftError::MissingSupport(v));
    }
    Ok(())
}

pub fn lift_hamiltonian(system: &PhsSystem, spec: &LiftSpec) -> Result<LiftedSystem, LiftError> {
    check_lift(system, spec)?;
    let rows = spec.state_rows();
    let j_sub = system.operator().select(&rows, &rows);
    let d_plus = spec.d_plus();
    let d_minus = spec.d_minus();
    let j_bar = d_plus.compose(&j_sub)?.compose(&d_minus)?;
    let density_bar = DensityProfile::new(spec.lift_poly(system.density().density())?);
    Ok(LiftedSystem {
        spec: spec.clone(),
        j_bar,
        density_bar,
        d_plus,
        d_minus,
    })
}

fn closed_form(
    system: &PhsSystem,
    spec: &LiftSpec,
    row_sign: bool,
) -> Result<Vec<RatMatrix>, LiftError> {
    check_lift(system, spec)?;
    let j = system.operator();
    let l = spec.len();
    let mut out = vec![RatMatrix::zeros(l, l); j.order() + 2 * spec.max_order() + 1];
    for (u, p) in j.stored_coeffs() {
        for (k, ek) in spec.entries().iter().enumerate() {
            for (kk, ekk) in spec.entries().iter().enumerate() {
                let c = p.get(ek.state() - 1, ekk.state() - 1);
                let s = if row_sign { ek.order() } else { ekk.order() };
                out[u + ek.order() + ekk.order()].add_at(k, kk, &(c * sign(s % 2 == 1)));
            }
        }
    }
    Ok(out)
}

/// `J_0, …, J_{m + 2 j_l}` of `𝕁` from the entry-pair formula: `(P_u)_{i_k i_k'}`
/// enters `J_{u + j_k + j_k'}` at `(k, k')` with sign `(−1)^{j_k'}`.
pub fn coefficients_closed_form(
    system: &PhsSystem,
    spec: &LiftSpec,
) -> Result<Vec<RatMatrix>, LiftError> {
    closed_form(system, spec, false)
}

/// The same formula with the sign taken from the row entry, `(−1)^{j_k}`.
/// It does not reproduce the composition and is kept for regression tests.
pub fn coefficients_row_sign(
    system: &PhsSystem,
    spec: &LiftSpec,
) -> Result<Vec<RatMatrix>, LiftError> {
    closed_form(system, spec, true)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DissipativeLift {
    pub lifted: LiftedSystem,
    pub g_bar: MatDiffOp,
    pub resistance: Resistance,
    pub composite: MatDiffOp,
}

impl DissipativeLift {
    pub fn to_system(&self) -> PhsSystem {
        self.lifted
            .to_system()
            .with_dissipation(Dissipation {
                g: self.g_bar.clone(),
                r: self.resistance.clone(),
            })
            .expect("lifted dissipation has l rows")
    }
}

pub fn lift_dissipative(system: &PhsSystem, spec: &LiftSpec) -> Result<DissipativeLift, LiftError> {
    let diss = system.dissipation().ok_or(LiftError::NotDissipative)?;
    let lifted = lift_hamiltonian(system, spec)?;
    let all_cols: Vec<usize> = (0..diss.g.cols()).collect();
    let g_sub = diss.g.select(&spec.state_rows(), &all_cols);
    let g_bar = lifted.d_plus.compose(&g_sub)?;
    let dg = diss.g.cols();
    let composite = MatDiffOp::block(
        &lifted.j_bar,
        &g_bar,
        &g_bar.formal_adjoint().neg(),
        &MatDiffOp::zero(dg, dg),
    )?;
    Ok(DissipativeLift {
        lifted,
        g_bar,
        resistance: diss.r.clone(),
        composite,
    })
}

/// `H_0, …, H_{m_g + j_l}` of `𝔾ᵣ`: row `k` of `H_{u + j_k}` receives row `i_k` of `G_u`.
pub fn g_coefficients_closed_form(
    system: &PhsSystem,
    spec: &LiftSpec,
) -> Result<Vec<RatMatrix>, LiftError> {
    let diss = system.dissipation().ok_or(LiftError::NotDissipative)?;
    check_lift(system, spec)?;
    let dg = diss.g.cols();
    let mut out = vec![RatMatrix::zeros(spec.len(), dg); diss.g.order() + spec.max_order() + 1];
    for (u, g) in diss.g.stored_coeffs() {
        for (k, ek) in spec.entries().iter().enumerate() {
            for c in 0..dg {
                out[u + ek.order()].add_at(k, c, g.get(ek.state() - 1, c));
            }
        }
    }
    Ok(out)
}

fn composite_with(
    jk: &[RatMatrix],
    hk: &[RatMatrix],
    lower_sign_odd: impl Fn(usize) -> bool,
) -> MatDiffOp {
    let l = jk.first().or(hk.first()).map_or(0, RatMatrix::rows);
    let dg = hk.first().map_or(0, RatMatrix::cols);
    let order = jk.len().max(hk.len());
    let coeffs = (0..order).map(|k| {
        let mut b = RatMatrix::zeros(l + dg, l + dg);
        if let Some(j) = jk.get(k) {
            b.paste(0, 0, j);
        }
        if let Some(h) = hk.get(k) {
            b.paste(0, l, h);
            let t = h.transpose();
            b.paste(l, 0, &if lower_sign_odd(k) { t.neg() } else { t });
        }
        (k, b)
    });
    MatDiffOp::from_coeffs(l + dg, l + dg, coeffs)
}

/// `Σ_k B_k ∂z^k` with `B_k = [[J_k, H_k], [(−1)^{k+1} H_kᵀ, 0]]`, built from
/// the lifted coefficients; equals `[[𝕁, 𝔾ᵣ], [−𝔾ᵣ*, 0]]`.
pub fn composite_operator(dl: &DissipativeLift) -> MatDiffOp {
    composite_with(
        &dl.lifted.j_bar.dense_coeffs(),
        &dl.g_bar.dense_coeffs(),
        |k| k % 2 == 0,
    )
}

/// Composite with lower-left blocks `(−1)^k H_kᵀ`; kept for regression tests.
pub fn composite_even_sign(dl: &DissipativeLift) -> MatDiffOp {
    composite_with(
        &dl.lifted.j_bar.dense_coeffs(),
        &dl.g_bar.dense_coeffs(),
        |k| k % 2 == 1,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jetexpr::{int, rat};
    use crate::opalg::tests::{c, d};
    use crate::opalg::DPoly;
    use proptest::prelude::*;

    fn u(i: usize, j: usize) -> JetPolynomial {
        JetPolynomial::u(i, j)
    }

    fn md(k: usize) -> DPoly {
        MatDiffOp::power_poly(k, false)
            .into_iter()
            .map(|v| -v)
            .collect()
    }

    fn boussinesq() -> PhsSystem {
        let h = u(1, 1).pow(2).scale(&rat(-1, 6))
            + u(1, 0).pow(3).scale(&rat(4, 9))
            + u(2, 0).pow(2).scale(&rat(1, 2));
        let j = MatDiffOp::from_entries(&[vec![c(0), d(1)], vec![d(1), c(0)]]);
        PhsSystem::new(j, DensityProfile::new(h)).unwrap()
    }

    fn rod() -> PhsSystem {
        let h = (u(2, 0).pow(2) + u(1, 0).pow(2) + u(1, 1).pow(2)).scale(&rat(1, 2));
        let j = MatDiffOp::from_entries(&[vec![c(0), c(1)], vec![c(-1), c(0)]]);
        PhsSystem::new(j, DensityProfile::new(h)).unwrap()
    }

    fn allen_cahn() -> PhsSystem {
        let f = (u(1, 0).pow(2) - JetPolynomial::one())
            .pow(2)
            .scale(&rat(1, 4));
        let h = f + u(1, 1).pow(2).scale(&rat(1, 2));
        PhsSystem::new(MatDiffOp::zero(1, 1), DensityProfile::new(h))
            .unwrap()
            .with_dissipation(Dissipation {
                g: MatDiffOp::identity(1),
                r: Resistance::scalar(JetPolynomial::one()).unwrap(),
            })
            .unwrap()
    }

    fn spec_of(pairs: &[(usize, usize)]) -> LiftSpec {
        LiftSpec::new(pairs.iter().map(|&(i, j)| JetVar::new(i, j))).unwrap()
    }

    #[test]
    fn inferred_index_sets() {
        let b = boussinesq();
        assert_eq!(
            infer_lift_spec(b.density(), 2),
            spec_of(&[(1, 0), (2, 0), (1, 1)])
        );
        assert_eq!(
            infer_lift_spec(b.density(), 2).to_string(),
            "{(1,0), (2,0), (1,1)}"
        );
        let ac = allen_cahn();
        assert_eq!(infer_lift_spec(ac.density(), 1), spec_of(&[(1, 0), (1, 1)]));
        let flat = DensityProfile::new(u(1, 0).pow(2));
        assert_eq!(infer_lift_spec(&flat, 3), LiftSpec::identity(3));
        assert!(matches!(
            LiftSpec::new([JetVar::new(1, 0), JetVar::new(1, 0)]),
            Err(LiftError::DuplicateEntry(_))
        ));
    }

    #[test]
    fn boussinesq_lift() {
        let b = boussinesq();
        let lifted = lift_hamiltonian(&b, &infer_lift_spec(b.density(), 2)).unwrap();
        let expected = MatDiffOp::from_entries(&[
            vec![c(0), d(1), c(0)],
            vec![d(1), c(0), md(2)],
            vec![c(0), d(2), c(0)],
        ]);
        assert_eq!(lifted.j_bar, expected);
        let h = u(3, 0).pow(2).scale(&rat(-1, 6))
            + u(1, 0).pow(3).scale(&rat(4, 9))
            + u(2, 0).pow(2).scale(&rat(1, 2));
        assert_eq!(lifted.density_bar.density(), &h);
        assert_eq!(lifted.density_bar.max_order(), 0);
    }

    #[test]
    fn boussinesq_closed_form_coefficients() {
        let b = boussinesq();
        let spec = infer_lift_spec(b.density(), 2);
        let jk = coefficients_closed_form(&b, &spec).unwrap();
        assert_eq!(jk.len(), 4);
        assert!(jk[0].is_zero());
        assert_eq!(
            jk[1],
            RatMatrix::from_i64(&[&[0, 1, 0], &[1, 0, 0], &[0, 0, 0]])
        );
        assert_eq!(
            jk[2],
            RatMatrix::from_i64(&[&[0, 0, 0], &[0, 0, -1], &[0, 1, 0]])
        );
        assert!(jk[3].is_zero());
        assert_eq!(
            lift_hamiltonian(&b, &spec).unwrap().j_bar.dense_coeffs(),
            jk[..3].to_vec()
        );
    }

    #[test]
    fn row_sign_formula_flips_boussinesq_j2() {
        let b = boussinesq();
        let spec = infer_lift_spec(b.density(), 2);
        let printed = coefficients_row_sign(&b, &spec).unwrap();
        assert_eq!(
            printed[2],
            RatMatrix::from_i64(&[&[0, 0, 0], &[0, 0, 1], &[0, -1, 0]])
        );
        let composed = lift_hamiltonian(&b, &spec).unwrap().j_bar;
        assert_ne!(printed[2], composed.coeff(2));
    }

    #[test]
    fn rod_lift() {
        let r = rod();
        let spec = infer_lift_spec(r.density(), 2);
        let lifted = lift_hamiltonian(&r, &spec).unwrap();
        let expected = MatDiffOp::from_entries(&[
            vec![c(0), c(1), c(0)],
            vec![c(-1), c(0), d(1)],
            vec![c(0), d(1), c(0)],
        ]);
        assert_eq!(lifted.j_bar, expected);
        let jk = coefficients_closed_form(&r, &spec).unwrap();
        assert_eq!(
            jk[0],
            RatMatrix::from_i64(&[&[0, 1, 0], &[-1, 0, 0], &[0, 0, 0]])
        );
        assert_eq!(
            jk[1],
            RatMatrix::from_i64(&[&[0, 0, 0], &[0, 0, 1], &[0, 1, 0]])
        );
        assert!(jk[2].is_zero());
    }

    #[test]
    fn identity_lift_is_trivial() {
        let sys = PhsSystem::new(
            MatDiffOp::from_entries(&[vec![c(0), d(1)], vec![d(1), d(3)]]),
            DensityProfile::new(u(1, 0).pow(2) + u(2, 0)),
        )
        .unwrap();
        let lifted = lift_hamiltonian(&sys, &LiftSpec::identity(2)).unwrap();
        assert_eq!(&lifted.j_bar, sys.operator());
        assert_eq!(&lifted.density_bar, sys.density());
    }

    #[test]
    fn missing_support_is_rejected() {
        let b = boussinesq();
        assert_eq!(
            lift_hamiltonian(&b, &LiftSpec::identity(2)),
            Err(LiftError::MissingSupport(JetVar::new(1, 1)))
        );
        assert!(matches!(
            lift_hamiltonian(&b, &spec_of(&[(1, 0), (3, 0), (1, 1)])),
            Err(LiftError::StateOutOfRange { .. })
        ));
    }

    #[test]
    fn allen_cahn_dissipative_lift() {
        let ac = allen_cahn();
        let spec = infer_lift_spec(ac.density(), 1);
        let dl = lift_dissipative(&ac, &spec).unwrap();
        assert_eq!(dl.g_bar, MatDiffOp::from_entries(&[vec![c(1)], vec![d(1)]]));
        let expected = MatDiffOp::from_entries(&[
            vec![c(0), c(0), c(1)],
            vec![c(0), c(0), d(1)],
            vec![c(-1), d(1), c(0)],
        ]);
        assert_eq!(dl.composite, expected);
        assert_eq!(composite_operator(&dl), expected);
        assert_ne!(composite_even_sign(&dl), expected);
        let hk = g_coefficients_closed_form(&ac, &spec).unwrap();
        assert_eq!(
            hk,
            vec![
                RatMatrix::from_i64(&[&[1], &[0]]),
                RatMatrix::from_i64(&[&[0], &[1]])
            ]
        );
    }

    #[test]
    fn zero_dissipation_gives_block_diagonal_composite() {
        let r = rod()
            .with_dissipation(Dissipation {
                g: MatDiffOp::zero(2, 1),
                r: Resistance::scalar(JetPolynomial::one()).unwrap(),
            })
            .unwrap();
        let spec = infer_lift_spec(r.density(), 2);
        let dl = lift_dissipative(&r, &spec).unwrap();
        assert!(dl.g_bar.is_zero());
        let z31 = MatDiffOp::zero(3, 1);
        let expected = MatDiffOp::block(
            &dl.lifted.j_bar,
            &z31,
            &MatDiffOp::zero(1, 3),
            &MatDiffOp::zero(1, 1),
        )
        .unwrap();
        assert_eq!(dl.composite, expected);
        assert_eq!(
            lift_dissipative(&rod(), &spec),
            Err(LiftError::NotDissipative)
        );
    }

    #[test]
    fn lifted_dynamics_prolong_to_original() {
        for sys in [boussinesq(), rod(), allen_cahn()] {
            let spec = infer_lift_spec(sys.density(), sys.n());
            let lifted = lift_hamiltonian(&sys, &spec).unwrap();
            let ebar: Vec<JetPolynomial> = lifted
                .density_bar
                .euler_gradient(spec.len())
                .iter()
                .map(|e| spec.prolong(e))
                .collect();
            let left = lifted.j_bar.apply(&ebar).unwrap();
            let right = lifted
                .d_plus
                .compose(
                    &sys.operator()
                        .select(&spec.state_rows(), &(0..sys.n()).collect::<Vec<_>>()),
                )
                .unwrap()
                .apply(&sys.efforts())
                .unwrap();
            assert_eq!(left, right);
        }
    }

    /// Random skew-adjoint `n × n` operator of order `≤ m`.
    fn skew_op(n: usize, m: usize, vals: &[i64]) -> MatDiffOp {
        let mut it = vals.iter().cycle();
        let coeffs = (0..=m).map(|k| {
            let mut a = RatMatrix::zeros(n, n);
            for i in 0..n {
                for j in i..n {
                    let v = int(*it.next().unwrap());
                    if k % 2 == 1 {
                        a.set(i, j, v.clone());
                        a.set(j, i, v);
                    } else if i != j {
                        a.set(i, j, v.clone());
                        a.set(j, i, -v);
                    }
                }
            }
            (k, a)
        });
        MatDiffOp::from_coeffs(n, n, coeffs)
    }

    fn random_spec(n: usize, picks: &[(usize, usize)]) -> LiftSpec {
        let mut set: BTreeSet<JetVar> = (1..=n).map(|i| JetVar::new(i, 0)).collect();
        set.extend(picks.iter().map(|&(i, j)| JetVar::new(i % n + 1, j)));
        LiftSpec::new(set).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn closed_forms_match_composition(
            n in 1usize..=4,
            m in 0usize..=3,
            vals in proptest::collection::vec(-3i64..=3, 16),
            picks in proptest::collection::vec((0usize..8, 1usize..=3), 0..4),
            gvals in proptest::collection::vec(-2i64..=2, 1..24),
            mg in 0usize..=2,
        ) {
            let j = skew_op(n, m, &vals);
            let spec = random_spec(n, &picks);
            let density = DensityProfile::new(
                spec.entries().iter().fold(JetPolynomial::zero(), |acc, v| acc + JetPolynomial::var(*v).pow(2)),
            );
            let mut git = gvals.iter().cycle();
            let g = MatDiffOp::from_coeffs(n, 2, (0..=mg).map(|k| {
                let rows: Vec<Vec<_>> = (0..n).map(|_| (0..2).map(|_| int(*git.next().unwrap())).collect()).collect();
                (k, RatMatrix::from_rows(rows))
            }));
            let sys = PhsSystem::new(j, density).unwrap().with_dissipation(Dissipation {
                g,
                r: Resistance::new(vec![vec![JetPolynomial::one(), JetPolynomial::zero()], vec![JetPolynomial::zero(), JetPolynomial::one()]]).unwrap(),
            }).unwrap();
            let dl = lift_dissipative(&sys, &spec).unwrap();
            let jk = coefficients_closed_form(&sys, &spec).unwrap();
            let composed = dl.lifted.j_bar.clone();
            for (k, a) in jk.iter().enumerate() {
                prop_assert_eq!(a, &composed.coeff(k));
            }
            prop_assert!(composed.order() < jk.len());
            prop_assert!(composed.is_skew_adjoint());
            let hk = g_coefficients_closed_form(&sys, &spec).unwrap();
            for (k, h) in hk.iter().enumerate() {
                prop_assert_eq!(h, &dl.g_bar.coeff(k));
            }
            prop_assert!(dl.g_bar.order() < hk.len());
            prop_assert_eq!(composite_operator(&dl), dl.composite.clone());
            prop_assert!(dl.composite.is_skew_adjoint());
        }
    }
}
