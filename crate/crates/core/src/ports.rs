//! Boundary port variables of a constant-coefficient skew-adjoint operator.
//!
//! With traces `τ(e) = (e, ∂z e, …, ∂z^{m−1} e)` and the symmetric matrix
//! `Q` whose block `(i, j)` is `(−1)^{i−1} P_{i+j−1}`, the port variables are
//! `(f∂; e∂) = W (τ(e)(b); τ(e)(a))` with `W = (1/√2) [[Q, −Q], [I, I]]`, so
//! that `e∂ᵀ f∂ = ½ [τᵀ Q τ]ₐᵇ`.

use num::{BigRational, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::field::SmoothField;
use crate::jetexpr::{rat, rational_to_f64, JetPolynomial, JetVar};
use crate::matrix::RatMatrix;
use crate::opalg::{MatDiffOp, OpError};
use crate::system::PhsSystem;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PortError {
    #[error(transparent)]
    Op(#[from] OpError),
    #[error("operator is not formally skew-adjoint")]
    NotSkew,
    #[error("trace vector has length {found}, expected {expected}")]
    TraceLength { expected: usize, found: usize },
    #[error("effort vector has length {found}, expected {expected}")]
    EffortLength { expected: usize, found: usize },
    #[error("effort {index} depends on the state; exact pairing needs polynomials in z")]
    NotSpatial { index: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PortFrame {
    order: usize,
    n: usize,
    q: RatMatrix,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PortSample {
    pub f_boundary: Vec<f64>,
    pub e_boundary: Vec<f64>,
}

impl PortSample {
    /// `e∂ᵀ f∂`.
    pub fn power(&self) -> f64 {
        self.e_boundary
            .iter()
            .zip(&self.f_boundary)
            .map(|(e, f)| e * f)
            .sum()
    }
}

pub fn build_port_frame(j: &MatDiffOp) -> Result<PortFrame, PortError> {
    if j.classify_symmetry()? != crate::opalg::Symmetry::SkewAdjoint {
        return Err(PortError::NotSkew);
    }
    let n = j.rows();
    let m = j.order();
    let mut q = RatMatrix::zeros(m * n, m * n);
    for bi in 1..=m {
        for bj in 1..=m + 1 - bi {
            let p = j.coeff(bi + bj - 1);
            let block = if bi % 2 == 0 { p.neg() } else { p };
            q.paste((bi - 1) * n, (bj - 1) * n, &block);
        }
    }
    Ok(PortFrame { order: m, n, q })
}

impl PortFrame {
    /// Operator order `m`; traces go up to derivative `m − 1`.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of boundary port pairs, `p = m n`.
    pub fn dim(&self) -> usize {
        self.order * self.n
    }

    pub fn q(&self) -> &RatMatrix {
        &self.q
    }

    /// `[[Q, −Q], [I, I]]`; the port map is this matrix times `1/√2`.
    pub fn w_unscaled(&self) -> RatMatrix {
        let p = self.dim();
        let mut w = RatMatrix::zeros(2 * p, 2 * p);
        w.paste(0, 0, &self.q);
        w.paste(0, p, &self.q.neg());
        w.paste(p, 0, &RatMatrix::identity(p));
        w.paste(p, p, &RatMatrix::identity(p));
        w
    }

    pub fn w(&self) -> Vec<Vec<f64>> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        self.w_unscaled()
            .to_f64()
            .into_iter()
            .map(|row| row.into_iter().map(|v| v * s).collect())
            .collect()
    }

    /// Symbolic traces `τ(e)`, stacked by derivative order.
    pub fn traces(&self, e: &[JetPolynomial]) -> Result<Vec<JetPolynomial>, PortError> {
        self.check_efforts(e.len())?;
        let mut out = Vec::with_capacity(self.dim());
        let mut current = e.to_vec();
        for _ in 0..self.order {
            let next = current
                .iter()
                .map(JetPolynomial::total_derivative)
                .collect();
            out.append(&mut current);
            current = next;
        }
        Ok(out)
    }

    /// `τᵀ Q σ` as a polynomial.
    pub fn boundary_form(&self, tau: &[JetPolynomial], sigma: &[JetPolynomial]) -> JetPolynomial {
        let mut acc = JetPolynomial::zero();
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                let q = self.q.get(i, j);
                if !q.is_zero() {
                    acc += (&tau[i] * &sigma[j]).scale(q);
                }
            }
        }
        acc
    }

    fn check_efforts(&self, len: usize) -> Result<(), PortError> {
        if len != self.n {
            return Err(PortError::EffortLength {
                expected: self.n,
                found: len,
            });
        }
        Ok(())
    }

    fn check_traces(&self, len: usize) -> Result<(), PortError> {
        if len != self.dim() {
            return Err(PortError::TraceLength {
                expected: self.dim(),
                found: len,
            });
        }
        Ok(())
    }

    fn quad(&self, x: &[f64], y: &[f64]) -> f64 {
        let p = self.dim();
        let mut acc = 0.0;
        for i in 0..p {
            for j in 0..p {
                let q = self.q.get(i, j);
                if !q.is_zero() {
                    acc += x[i] * rational_to_f64(q) * y[j];
                }
            }
        }
        acc
    }

    /// `(f∂; e∂) = W (τ_b; τ_a)`.
    pub fn evaluate(&self, tau_a: &[f64], tau_b: &[f64]) -> Result<PortSample, PortError> {
        self.check_traces(tau_a.len())?;
        self.check_traces(tau_b.len())?;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let p = self.dim();
        let diff: Vec<f64> = tau_b.iter().zip(tau_a).map(|(b, a)| b - a).collect();
        let f_boundary = (0..p)
            .map(|i| {
                s * (0..p)
                    .map(|j| rational_to_f64(self.q.get(i, j)) * diff[j])
                    .sum::<f64>()
            })
            .collect();
        let e_boundary = tau_b.iter().zip(tau_a).map(|(b, a)| s * (b + a)).collect();
        Ok(PortSample {
            f_boundary,
            e_boundary,
        })
    }

    /// `½ (τ_bᵀ Q τ_b − τ_aᵀ Q τ_a)`, equal to `e∂ᵀ f∂`.
    pub fn power(&self, tau_a: &[f64], tau_b: &[f64]) -> f64 {
        0.5 * (self.quad(tau_b, tau_b) - self.quad(tau_a, tau_a))
    }

    /// `e∂₁ᵀ f∂₂ + e∂₂ᵀ f∂₁ = [τ₁ᵀ Q τ₂]ₐᵇ` in exact arithmetic.
    pub fn symmetric_pairing_exact(
        &self,
        tau1: (&[BigRational], &[BigRational]),
        tau2: (&[BigRational], &[BigRational]),
    ) -> BigRational {
        let form = |x: &[BigRational], y: &[BigRational]| {
            let qy = self.q.mat_vec(y);
            x.iter()
                .zip(&qy)
                .fold(BigRational::zero(), |acc, (a, b)| acc + a * b)
        };
        let sum = |x: &[BigRational], y: &[BigRational]| -> Vec<BigRational> {
            x.iter().zip(y).map(|(a, b)| a + b).collect()
        };
        let diff = |x: &[BigRational], y: &[BigRational]| -> Vec<BigRational> {
            x.iter().zip(y).map(|(a, b)| a - b).collect()
        };
        // e∂ᵢ = (τᵢ_b + τᵢ_a)/√2, f∂ᵢ = Q(τᵢ_b − τᵢ_a)/√2
        let half = rat(1, 2);
        let (a1, b1) = tau1;
        let (a2, b2) = tau2;
        (form(&sum(b1, a1), &diff(b2, a2)) + form(&sum(b2, a2), &diff(b1, a1))) * half
    }
}

/// `e₁ᵀ 𝒥 e₂ + (𝒥 e₁)ᵀ e₂ − D_z(τ(e₁)ᵀ Q τ(e₂))`, identically zero.
pub fn telescoping_residual(
    j: &MatDiffOp,
    frame: &PortFrame,
    e1: &[JetPolynomial],
    e2: &[JetPolynomial],
) -> Result<JetPolynomial, PortError> {
    let je1 = j.apply(e1)?;
    let je2 = j.apply(e2)?;
    let mut bulk = JetPolynomial::zero();
    for i in 0..j.rows() {
        bulk += &e1[i] * &je2[i];
        bulk += &je1[i] * &e2[i];
    }
    let boundary = frame.boundary_form(&frame.traces(e1)?, &frame.traces(e2)?);
    Ok(bulk - boundary.total_derivative())
}

fn integrate_exact(p: &JetPolynomial, a: &BigRational, b: &BigRational) -> Option<BigRational> {
    let anti = p.antiderivative_z()?;
    Some(anti.eval_z(b)? - anti.eval_z(a)?)
}

/// `∫ₐᵇ e₁ᵀ𝒥e₂ + (𝒥e₁)ᵀe₂ dz − (e∂₁ᵀf∂₂ + e∂₂ᵀf∂₁)` for efforts that are
/// polynomials in `z`, computed exactly.
pub fn pairing_residual(
    j: &MatDiffOp,
    frame: &PortFrame,
    e1: &[JetPolynomial],
    e2: &[JetPolynomial],
    a: &BigRational,
    b: &BigRational,
) -> Result<BigRational, PortError> {
    for (index, e) in e1.iter().chain(e2).enumerate() {
        if !e.is_z_only() {
            return Err(PortError::NotSpatial { index });
        }
    }
    frame.check_efforts(e1.len())?;
    frame.check_efforts(e2.len())?;
    let je1 = j.apply(e1)?;
    let je2 = j.apply(e2)?;
    let mut bulk = JetPolynomial::zero();
    for i in 0..j.rows() {
        bulk += &e1[i] * &je2[i];
        bulk += &je1[i] * &e2[i];
    }
    let interior = integrate_exact(&bulk, a, b).expect("z-only polynomial");
    let at = |taus: &[JetPolynomial], z: &BigRational| -> Vec<BigRational> {
        taus.iter()
            .map(|t| t.eval_z(z).expect("z-only polynomial"))
            .collect()
    };
    let t1 = frame.traces(e1)?;
    let t2 = frame.traces(e2)?;
    let (t1a, t1b, t2a, t2b) = (at(&t1, a), at(&t1, b), at(&t2, a), at(&t2, b));
    Ok(interior - frame.symmetric_pairing_exact((&t1a, &t1b), (&t2a, &t2b)))
}

/// Composite Simpson rule with `panels` (rounded up to even) subintervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let n = panels.max(2).div_ceil(2) * 2;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + k as f64 * h);
    }
    acc * h / 3.0
}

fn eval_field<F: SmoothField>(p: &JetPolynomial, x: &[F], z: f64) -> f64 {
    p.eval(z, |v: JetVar| x[v.state() - 1].derivative(v.order(), z))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BalanceReport {
    /// `dℋ/dt` by the chain rule.
    pub dh_dt: f64,
    /// `e∂ᵀ f∂` of the operator (the composite one for dissipative systems).
    pub port_power: f64,
    /// `∫ φᵀ F dz ≥ 0`, zero without dissipation.
    pub dissipated: f64,
    /// `dh_dt − port_power + dissipated`.
    pub defect: f64,
}

/// Symbolic efforts `(δℋ; φ)` and the operator whose ports they feed.
fn port_efforts(system: &PhsSystem) -> (MatDiffOp, Vec<JetPolynomial>, Vec<JetPolynomial>) {
    let e = system.efforts();
    match system.dissipation() {
        None => (system.operator().clone(), e, Vec::new()),
        Some(diss) => {
            let f: Vec<JetPolynomial> = diss
                .g
                .formal_adjoint()
                .apply(&e)
                .expect("shape checked")
                .into_iter()
                .map(|p| -p)
                .collect();
            let phi: Vec<JetPolynomial> = diss
                .r
                .entries()
                .iter()
                .map(|row| {
                    row.iter()
                        .zip(&f)
                        .fold(JetPolynomial::zero(), |acc, (r, fj)| acc + r * fj)
                })
                .collect();
            let dg = diss.g.cols();
            let composite = MatDiffOp::block(
                system.operator(),
                &diss.g,
                &diss.g.formal_adjoint().neg(),
                &MatDiffOp::zero(dg, dg),
            )
            .expect("shape checked");
            let mut full = e;
            full.extend(phi.iter().cloned());
            let dissipation_density = phi
                .iter()
                .zip(&f)
                .fold(JetPolynomial::zero(), |acc, (p, q)| acc + p * q);
            (composite, full, vec![dissipation_density])
        }
    }
}

/// `Σ_v ∂H/∂v · D_z^{order(v)} ẋ_{state(v)}`, the chain-rule integrand of `dℋ/dt`.
pub fn power_density(system: &PhsSystem) -> JetPolynomial {
    let rhs = system.rhs_symbolic();
    let h = system.density().density();
    system
        .density()
        .support()
        .iter()
        .fold(JetPolynomial::zero(), |acc, &v| {
            acc + h.partial(v) * rhs[v.state() - 1].total_derivative_n(v.order())
        })
}

/// Boundary density `B` with `D_z B = power_density − δℋᵀ ẋ`, from integrating
/// the derivative terms of the chain rule by parts.
pub fn euler_boundary_density(system: &PhsSystem) -> JetPolynomial {
    let rhs = system.rhs_symbolic();
    let h = system.density().density();
    let mut acc = JetPolynomial::zero();
    for &v in system.density().support() {
        let dh = h.partial(v);
        let xdot = &rhs[v.state() - 1];
        let mut left = dh;
        for r in 0..v.order() {
            let right = xdot.total_derivative_n(v.order() - 1 - r);
            acc += &left * &right;
            left = -left.total_derivative();
        }
    }
    acc
}

/// Continuous energy balance for a manufactured state, with Simpson quadrature.
pub fn continuous_balance<F: SmoothField>(
    system: &PhsSystem,
    x: &[F],
    a: f64,
    b: f64,
    panels: usize,
) -> Result<BalanceReport, PortError> {
    let (op, efforts, dissipation) = port_efforts(system);
    let frame = build_port_frame(&op)?;
    let density = power_density(system);
    let dh_dt = simpson(|z| eval_field(&density, x, z), a, b, panels);
    let dissipated = dissipation
        .first()
        .map_or(0.0, |d| simpson(|z| eval_field(d, x, z), a, b, panels));
    let traces = frame.traces(&efforts)?;
    let at = |z: f64| -> Vec<f64> { traces.iter().map(|t| eval_field(t, x, z)).collect() };
    let port_power = frame.power(&at(a), &at(b));
    Ok(BalanceReport {
        dh_dt,
        port_power,
        dissipated,
        defect: dh_dt - port_power + dissipated,
    })
}

/// `[B]ₐᵇ` for the boundary density of [`euler_boundary_density`].
pub fn euler_boundary_bracket<F: SmoothField>(system: &PhsSystem, x: &[F], a: f64, b: f64) -> f64 {
    let bd = euler_boundary_density(system);
    eval_field(&bd, x, b) - eval_field(&bd, x, a)
}

/// `[∂z x₁ · δℋ]ₐᵇ`, the bracket in the form usually quoted for scalar KdV.
pub fn kdv_quoted_bracket<F: SmoothField>(system: &PhsSystem, x: &[F], a: f64, b: f64) -> f64 {
    let p = JetPolynomial::u(1, 1) * system.density().euler_derivative(1);
    eval_field(&p, x, b) - eval_field(&p, x, a)
}
