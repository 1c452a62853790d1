//! Constant-coefficient matrix differential operators `Σ_k A_k ∂z^k`.

use std::collections::BTreeMap;
use std::fmt;

use num::{BigRational, One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::jetexpr::JetPolynomial;
use crate::matrix::RatMatrix;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OpError {
    #[error("{op}: dimension mismatch ({left_rows}x{left_cols} vs {right_rows}x{right_cols})")]
    DimensionMismatch {
        op: &'static str,
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },
    #[error("operator is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Symmetry {
    SkewAdjoint,
    SelfAdjoint,
    Neither,
}

/// Univariate polynomial in `∂z`, ascending coefficients, no trailing zeros.
pub type DPoly = Vec<BigRational>;

fn trim(mut p: DPoly) -> DPoly {
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
    p
}

/// `Σ_k A_k ∂z^k` with constant rational `rows × cols` coefficients.
///
/// Zero coefficients are never stored, so `==` is exact operator equality.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatDiffOp {
    rows: usize,
    cols: usize,
    coeffs: BTreeMap<usize, RatMatrix>,
}

impl MatDiffOp {
    pub fn zero(rows: usize, cols: usize) -> Self {
        MatDiffOp {
            rows,
            cols,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_coeffs(n, n, [(0, RatMatrix::identity(n))])
    }

    /// Panics if a coefficient has the wrong shape.
    pub fn from_coeffs(
        rows: usize,
        cols: usize,
        coeffs: impl IntoIterator<Item = (usize, RatMatrix)>,
    ) -> Self {
        let mut op = Self::zero(rows, cols);
        for (k, a) in coeffs {
            assert_eq!(a.shape(), (rows, cols), "coefficient {k} has wrong shape");
            op.accumulate(k, &a);
        }
        op
    }

    /// Builds an operator from its entries, each a polynomial in `∂z`.
    pub fn from_entries(entries: &[Vec<DPoly>]) -> Self {
        let rows = entries.len();
        let cols = entries.first().map_or(0, Vec::len);
        let mut op = Self::zero(rows, cols);
        for (i, row) in entries.iter().enumerate() {
            assert_eq!(row.len(), cols, "ragged operator rows");
            for (j, poly) in row.iter().enumerate() {
                for (k, c) in poly.iter().enumerate() {
                    if !c.is_zero() {
                        let mut m = RatMatrix::zeros(rows, cols);
                        m.set(i, j, c.clone());
                        op.accumulate(k, &m);
                    }
                }
            }
        }
        op
    }

    /// `diag(p_1(∂z), …, p_n(∂z))`.
    pub fn diagonal(polys: &[DPoly]) -> Self {
        let n = polys.len();
        let entries: Vec<Vec<DPoly>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { polys[i].clone() } else { Vec::new() })
                    .collect()
            })
            .collect();
        Self::from_entries(&entries)
    }

    /// `(sign ∂z)^k` as a polynomial.
    pub fn power_poly(k: usize, negative: bool) -> DPoly {
        let mut p = vec![BigRational::zero(); k + 1];
        p[k] = if negative && k % 2 == 1 {
            -BigRational::one()
        } else {
            BigRational::one()
        };
        p
    }

    fn accumulate(&mut self, k: usize, a: &RatMatrix) {
        if a.is_zero() {
            return;
        }
        let sum = match self.coeffs.get(&k) {
            Some(existing) => existing.add(a),
            None => a.clone(),
        };
        if sum.is_zero() {
            self.coeffs.remove(&k);
        } else {
            self.coeffs.insert(k, sum);
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Highest stored power of `∂z` (0 for the zero operator).
    pub fn order(&self) -> usize {
        self.coeffs.keys().next_back().copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `A_k`, zero when not stored.
    pub fn coeff(&self, k: usize) -> RatMatrix {
        self.coeffs
            .get(&k)
            .cloned()
            .unwrap_or_else(|| RatMatrix::zeros(self.rows, self.cols))
    }

    /// `[A_0, …, A_order]` including zero slots.
    pub fn dense_coeffs(&self) -> Vec<RatMatrix> {
        (0..=self.order()).map(|k| self.coeff(k)).collect()
    }

    pub fn stored_coeffs(&self) -> impl Iterator<Item = (usize, &RatMatrix)> {
        self.coeffs.iter().map(|(k, m)| (*k, m))
    }

    /// Entry `(i, j)` (0-based) as a polynomial in `∂z`.
    pub fn entry(&self, i: usize, j: usize) -> DPoly {
        let mut p = vec![BigRational::zero(); self.order() + 1];
        for (k, m) in &self.coeffs {
            p[*k] = m.get(i, j).clone();
        }
        trim(p)
    }

    pub fn entries(&self) -> Vec<Vec<DPoly>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.entry(i, j)).collect())
            .collect()
    }

    /// Symbolic application: component `i` is `Σ_k Σ_j (A_k)_{ij} D_z^k e_j`.
    pub fn apply(&self, e: &[JetPolynomial]) -> Result<Vec<JetPolynomial>, OpError> {
        if e.len() != self.cols {
            return Err(OpError::DimensionMismatch {
                op: "apply",
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: e.len(),
                right_cols: 1,
            });
        }
        // D_z^k e_j for every stored k
        let mut derivs: Vec<Vec<JetPolynomial>> = e.iter().map(|ej| vec![ej.clone()]).collect();
        for row in derivs.iter_mut() {
            for _ in 0..self.order() {
                let next = row.last().expect("nonempty").total_derivative();
                row.push(next);
            }
        }
        let mut out = vec![JetPolynomial::zero(); self.rows];
        for (k, a) in &self.coeffs {
            for (i, slot) in out.iter_mut().enumerate() {
                for (j, dj) in derivs.iter().enumerate() {
                    let c = a.get(i, j);
                    if !c.is_zero() {
                        *slot += dj[*k].scale(c);
                    }
                }
            }
        }
        Ok(out)
    }

    /// `self ∘ other`; constant coefficients give the Cauchy product.
    pub fn compose(&self, other: &MatDiffOp) -> Result<MatDiffOp, OpError> {
        if self.cols != other.rows {
            return Err(self.mismatch("compose", other));
        }
        let mut out = MatDiffOp::zero(self.rows, other.cols);
        for (p, a) in &self.coeffs {
            for (q, b) in &other.coeffs {
                out.accumulate(p + q, &a.matmul(b));
            }
        }
        Ok(out)
    }

    /// `A* = Σ_k (−1)^k A_kᵀ ∂z^k`.
    pub fn formal_adjoint(&self) -> MatDiffOp {
        let mut out = MatDiffOp::zero(self.cols, self.rows);
        for (k, a) in &self.coeffs {
            let t = a.transpose();
            out.accumulate(*k, &if k % 2 == 1 { t.neg() } else { t });
        }
        out
    }

    /// Zero operators classify as skew-adjoint.
    pub fn classify_symmetry(&self) -> Result<Symmetry, OpError> {
        if self.rows != self.cols {
            return Err(OpError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let skew = self.coeffs.iter().all(|(k, a)| {
            let t = a.transpose();
            *a == if k % 2 == 0 { t.neg() } else { t }
        });
        if skew {
            return Ok(Symmetry::SkewAdjoint);
        }
        let selfadj = self.coeffs.iter().all(|(k, a)| {
            let t = a.transpose();
            *a == if k % 2 == 1 { t.neg() } else { t }
        });
        Ok(if selfadj {
            Symmetry::SelfAdjoint
        } else {
            Symmetry::Neither
        })
    }

    pub fn is_skew_adjoint(&self) -> bool {
        self.classify_symmetry() == Ok(Symmetry::SkewAdjoint)
    }

    pub fn neg(&self) -> MatDiffOp {
        MatDiffOp {
            rows: self.rows,
            cols: self.cols,
            coeffs: self.coeffs.iter().map(|(k, a)| (*k, a.neg())).collect(),
        }
    }

    pub fn add(&self, other: &MatDiffOp) -> Result<MatDiffOp, OpError> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(self.mismatch("add", other));
        }
        let mut out = self.clone();
        for (k, b) in &other.coeffs {
            out.accumulate(*k, b);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &MatDiffOp) -> Result<MatDiffOp, OpError> {
        self.add(&other.neg())
    }

    /// Sub-operator picked by 0-based row and column indices.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> MatDiffOp {
        MatDiffOp::from_coeffs(
            rows.len(),
            cols.len(),
            self.coeffs.iter().map(|(k, a)| (*k, a.select(rows, cols))),
        )
    }

    /// `[[a, b], [c, d]]`.
    pub fn block(
        a: &MatDiffOp,
        b: &MatDiffOp,
        c: &MatDiffOp,
        d: &MatDiffOp,
    ) -> Result<MatDiffOp, OpError> {
        if a.rows != b.rows || c.rows != d.rows {
            return Err(a.mismatch("block rows", b));
        }
        if a.cols != c.cols || b.cols != d.cols {
            return Err(a.mismatch("block cols", c));
        }
        let rows = a.rows + c.rows;
        let cols = a.cols + b.cols;
        let order = a.order().max(b.order()).max(c.order()).max(d.order());
        let mut out = MatDiffOp::zero(rows, cols);
        for k in 0..=order {
            let mut m = RatMatrix::zeros(rows, cols);
            m.paste(0, 0, &a.coeff(k));
            m.paste(0, a.cols, &b.coeff(k));
            m.paste(a.rows, 0, &c.coeff(k));
            m.paste(a.rows, a.cols, &d.coeff(k));
            out.accumulate(k, &m);
        }
        Ok(out)
    }

    fn mismatch(&self, op: &'static str, other: &MatDiffOp) -> OpError {
        OpError::DimensionMismatch {
            op,
            left_rows: self.rows,
            left_cols: self.cols,
            right_rows: other.rows,
            right_cols: other.cols,
        }
    }
}

/// Formats a polynomial in `∂z` using the operator text syntax (`d`).
pub fn format_dpoly(p: &DPoly) -> String {
    let terms: Vec<(usize, &BigRational)> = p
        .iter()
        .enumerate()
        .filter(|(_, c)| !c.is_zero())
        .rev()
        .collect();
    if terms.is_empty() {
        return "0".to_string();
    }
    let mut s = String::new();
    for (idx, (k, c)) in terms.into_iter().enumerate() {
        let neg = c.is_negative();
        if idx == 0 {
            if neg {
                s.push('-');
            }
        } else {
            s.push_str(if neg { " - " } else { " + " });
        }
        let mag = c.abs();
        let power = match k {
            0 => String::new(),
            1 => "d".to_string(),
            k => format!("d^{k}"),
        };
        if k == 0 {
            s.push_str(&mag.to_string());
        } else if mag.is_one() {
            s.push_str(&power);
        } else {
            s.push_str(&format!("{mag}*{power}"));
        }
    }
    s
}

impl fmt::Display for MatDiffOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .entries()
            .iter()
            .map(|row| {
                let cells: Vec<String> = row.iter().map(format_dpoly).collect();
                format!("[{}]", cells.join(", "))
            })
            .collect();
        write!(f, "[{}]", rows.join(", "))
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::jetexpr::{int, JetPolynomial};
    use proptest::prelude::*;

    pub(crate) fn d(k: usize) -> DPoly {
        MatDiffOp::power_poly(k, false)
    }

    pub(crate) fn c(v: i64) -> DPoly {
        trim(vec![int(v)])
    }

    fn scalar(p: DPoly) -> MatDiffOp {
        MatDiffOp::from_entries(&[vec![p]])
    }

    #[test]
    fn apply_boussinesq_operator() {
        let j = MatDiffOp::from_entries(&[vec![c(0), d(1)], vec![d(1), c(0)]]);
        let out = j
            .apply(&[JetPolynomial::u(2, 0), JetPolynomial::u(1, 0)])
            .unwrap();
        assert_eq!(out, vec![JetPolynomial::u(1, 1), JetPolynomial::u(2, 1)]);
        assert!(j.apply(&[JetPolynomial::u(1, 0)]).is_err());
    }

    #[test]
    fn identity_applies_trivially() {
        let e = vec![JetPolynomial::u(1, 2), JetPolynomial::z()];
        assert_eq!(MatDiffOp::identity(2).apply(&e).unwrap(), e);
    }

    #[test]
    fn compose_and_adjoint_basics() {
        let dz = scalar(d(1));
        assert_eq!(dz.compose(&dz).unwrap(), scalar(d(2)));
        assert_eq!(dz.formal_adjoint(), dz.neg());
        let a = MatDiffOp::from_entries(&[vec![c(1), d(2)], vec![c(3), d(1)]]);
        assert_eq!(a.compose(&MatDiffOp::identity(2)).unwrap(), a);
        assert!(a.compose(&MatDiffOp::identity(3)).is_err());
    }

    #[test]
    fn column_adjoint() {
        let g = MatDiffOp::from_entries(&[vec![c(1)], vec![d(1)]]);
        let expected = MatDiffOp::from_entries(&[vec![c(1), MatDiffOp::power_poly(1, true)]]);
        assert_eq!(g.formal_adjoint(), expected);
    }

    #[test]
    fn classification() {
        let bous = MatDiffOp::from_entries(&[vec![c(0), d(1)], vec![d(1), c(0)]]);
        assert_eq!(bous.classify_symmetry(), Ok(Symmetry::SkewAdjoint));
        let rod = MatDiffOp::from_entries(&[vec![c(0), c(1)], vec![c(-1), c(0)]]);
        assert_eq!(rod.classify_symmetry(), Ok(Symmetry::SkewAdjoint));
        assert_eq!(scalar(d(2)).classify_symmetry(), Ok(Symmetry::SelfAdjoint));
        let neither = MatDiffOp::from_entries(&[vec![c(1), d(1)], vec![c(0), c(0)]]);
        assert_eq!(neither.classify_symmetry(), Ok(Symmetry::Neither));
        let rect = MatDiffOp::from_entries(&[vec![c(1), d(1)]]);
        assert!(matches!(
            rect.classify_symmetry(),
            Err(OpError::NotSquare { .. })
        ));
    }

    #[test]
    fn display_uses_operator_syntax() {
        let op = MatDiffOp::from_entries(&[
            vec![c(0), d(1)],
            vec![
                d(1),
                MatDiffOp::power_poly(2, false)
                    .into_iter()
                    .map(|v| -v)
                    .collect(),
            ],
        ]);
        assert_eq!(op.to_string(), "[[0, d], [d, -d^2]]");
    }

    /// Random operator with small integer coefficients.
    pub(crate) fn arb_op(
        rows: usize,
        cols: usize,
        max_order: usize,
    ) -> impl Strategy<Value = MatDiffOp> {
        proptest::collection::vec(
            proptest::collection::vec(-2i64..=2, rows * cols),
            max_order + 1,
        )
        .prop_map(move |cs| {
            MatDiffOp::from_coeffs(
                rows,
                cols,
                cs.into_iter().enumerate().map(|(k, vals)| {
                    let m = RatMatrix::from_rows(
                        vals.chunks(cols)
                            .map(|r| r.iter().map(|&v| int(v)).collect())
                            .collect(),
                    );
                    (k, m)
                }),
            )
        })
    }

    /// Integration-by-parts oracle: `(A e)ᵀ f − eᵀ (A* f)` must be a total
    /// derivative, i.e. annihilated by every Euler operator.
    fn is_total_derivative(p: &JetPolynomial, states: usize) -> bool {
        let d = crate::jetexpr::DensityProfile::new(p.clone());
        (1..=states).all(|i| d.euler_derivative(i).is_zero())
    }

    proptest! {
        #[test]
        fn adjoint_is_involution_and_antihomomorphism(
            a in arb_op(2, 3, 2), b in arb_op(3, 2, 2)
        ) {
            prop_assert_eq!(a.formal_adjoint().formal_adjoint(), a.clone());
            let ab = a.compose(&b).unwrap();
            prop_assert_eq!(ab.formal_adjoint(), b.formal_adjoint().compose(&a.formal_adjoint()).unwrap());
        }

        #[test]
        fn compose_is_associative(a in arb_op(2, 3, 2), b in arb_op(3, 2, 1), c2 in arb_op(2, 2, 2)) {
            let left = a.compose(&b).unwrap().compose(&c2).unwrap();
            let right = a.compose(&b.compose(&c2).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn skew_iff_adjoint_is_negative(a in arb_op(2, 2, 3)) {
            let skew_part = a.sub(&a.formal_adjoint()).unwrap();
            prop_assert_eq!(skew_part.classify_symmetry().unwrap(), Symmetry::SkewAdjoint);
            let is_skew = a.classify_symmetry().unwrap() == Symmetry::SkewAdjoint;
            prop_assert_eq!(is_skew, a.formal_adjoint() == a.neg());
        }

        #[test]
        fn adjoint_satisfies_integration_by_parts(a in arb_op(2, 2, 3)) {
            // e uses states 1..2, f uses states 3..4 so the pairing is bilinear
            let e = vec![JetPolynomial::u(1, 0), JetPolynomial::u(2, 0)];
            let f = vec![JetPolynomial::u(3, 0), JetPolynomial::u(4, 0)];
            let ae = a.apply(&e).unwrap();
            let astar_f = a.formal_adjoint().apply(&f).unwrap();
            let mut residual = JetPolynomial::zero();
            for i in 0..2 {
                residual += &ae[i] * &f[i];
                residual -= &(&e[i] * &astar_f[i]);
            }
            prop_assert!(is_total_derivative(&residual, 4));
        }
    }
}
