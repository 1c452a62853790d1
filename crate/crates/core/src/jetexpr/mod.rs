//! Exact polynomial algebra over jet coordinates.
//!
//! A [`JetPolynomial`] is a polynomial with rational coefficients in the jet
//! variables `u_{i,j} = ∂z^j x_i` and the spatial variable `z`. Every jet
//! variable is treated as an independent coordinate; the link between
//! `u_{i,j}` and `u_{i,j+1}` only enters through [`JetPolynomial::total_derivative`].
//!
//! The representation is canonical (sorted monomials, no zero coefficients),
//! so structural equality decides mathematical equality.

mod density;
mod gateaux;

pub use density::{euler_derivative, DensityProfile};
pub use gateaux::{check_euler_vs_gateaux, GateauxError, GateauxReport};

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};

/// A jet coordinate `∂z^order x_state` (states are 1-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct JetVar {
    state: usize,
    order: usize,
}

impl JetVar {
    /// Panics if `state == 0`; state indices start at 1.
    pub fn new(state: usize, order: usize) -> Self {
        assert!(state >= 1, "jet variable state index is 1-based");
        JetVar { state, order }
    }

    pub fn state(self) -> usize {
        self.state
    }

    pub fn order(self) -> usize {
        self.order
    }

    /// The coordinate one derivative higher.
    pub fn prolonged(self) -> Self {
        JetVar {
            state: self.state,
            order: self.order + 1,
        }
    }
}

impl fmt::Display for JetVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.order {
            0 => write!(f, "x{}", self.state),
            1 => write!(f, "dz(x{})", self.state),
            k => write!(f, "dz{}(x{})", k, self.state),
        }
    }
}

/// Product of jet-variable powers times a power of `z`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Monomial {
    // sorted by JetVar, exponents > 0
    vars: Vec<(JetVar, u32)>,
    z: u32,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial::default()
    }

    pub fn var(v: JetVar) -> Self {
        Monomial {
            vars: vec![(v, 1)],
            z: 0,
        }
    }

    pub fn z_power(k: u32) -> Self {
        Monomial {
            vars: Vec::new(),
            z: k,
        }
    }

    pub fn degree(&self) -> u32 {
        self.vars.iter().map(|&(_, e)| e).sum::<u32>() + self.z
    }

    pub fn vars(&self) -> &[(JetVar, u32)] {
        &self.vars
    }

    pub fn z_exponent(&self) -> u32 {
        self.z
    }

    pub fn exponent(&self, v: JetVar) -> u32 {
        self.vars
            .binary_search_by(|(w, _)| w.cmp(&v))
            .map(|i| self.vars[i].1)
            .unwrap_or(0)
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let mut vars = Vec::with_capacity(self.vars.len() + other.vars.len());
        let (mut i, mut j) = (0, 0);
        while i < self.vars.len() && j < other.vars.len() {
            let (a, ea) = self.vars[i];
            let (b, eb) = other.vars[j];
            match a.cmp(&b) {
                Ordering::Less => {
                    vars.push((a, ea));
                    i += 1;
                }
                Ordering::Greater => {
                    vars.push((b, eb));
                    j += 1;
                }
                Ordering::Equal => {
                    vars.push((a, ea + eb));
                    i += 1;
                    j += 1;
                }
            }
        }
        vars.extend_from_slice(&self.vars[i..]);
        vars.extend_from_slice(&other.vars[j..]);
        Monomial {
            vars,
            z: self.z + other.z,
        }
    }

    /// Lowers the exponent of `v` by one, returning the old exponent.
    fn lower(&self, v: JetVar) -> Option<(u32, Monomial)> {
        let idx = self.vars.binary_search_by(|(w, _)| w.cmp(&v)).ok()?;
        let e = self.vars[idx].1;
        let mut m = self.clone();
        if e == 1 {
            m.vars.remove(idx);
        } else {
            m.vars[idx].1 -= 1;
        }
        Some((e, m))
    }
}

// Graded lexicographic: total degree first, then exponents in variable order
// (state index, derivative order), then the power of z.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.vars.cmp(&other.vars))
            .then_with(|| self.z.cmp(&other.z))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Exact-coefficient polynomial in jet variables and `z`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct JetPolynomial {
    terms: BTreeMap<Monomial, BigRational>,
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl JetPolynomial {
    pub fn zero() -> Self {
        JetPolynomial::default()
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        Self::from_term(Monomial::one(), c)
    }

    pub fn var(v: JetVar) -> Self {
        Self::from_term(Monomial::var(v), BigRational::one())
    }

    /// Shorthand for `u_{state,order}`.
    pub fn u(state: usize, order: usize) -> Self {
        Self::var(JetVar::new(state, order))
    }

    pub fn z() -> Self {
        Self::from_term(Monomial::z_power(1), BigRational::one())
    }

    pub fn from_term(m: Monomial, c: BigRational) -> Self {
        let mut p = JetPolynomial::zero();
        p.add_term(m, c);
        p
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `Some(c)` when the polynomial is the constant `c`.
    pub fn as_constant(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => self.terms.get(&Monomial::one()).cloned(),
            _ => None,
        }
    }

    /// True when no jet variable occurs (a polynomial in `z` only).
    pub fn is_z_only(&self) -> bool {
        self.terms.keys().all(|m| m.vars.is_empty())
    }

    fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return JetPolynomial::zero();
        }
        JetPolynomial {
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = JetPolynomial::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// All jet variables occurring with a nonzero coefficient.
    pub fn variables(&self) -> BTreeSet<JetVar> {
        self.terms
            .keys()
            .flat_map(|m| m.vars.iter().map(|&(v, _)| v))
            .collect()
    }

    /// Highest derivative order among the occurring jet variables.
    pub fn max_order(&self) -> Option<usize> {
        self.variables().iter().map(|v| v.order).max()
    }

    /// Largest state index among the occurring jet variables.
    pub fn max_state(&self) -> Option<usize> {
        self.variables().iter().map(|v| v.state).max()
    }

    /// Formal partial derivative with respect to a jet coordinate.
    pub fn partial(&self, v: JetVar) -> Self {
        let mut out = JetPolynomial::zero();
        for (m, c) in &self.terms {
            if let Some((e, lowered)) = m.lower(v) {
                out.add_term(lowered, c * BigRational::from_integer(BigInt::from(e)));
            }
        }
        out
    }

    /// Partial derivative with respect to the explicit `z` slot only.
    pub fn partial_z(&self) -> Self {
        let mut out = JetPolynomial::zero();
        for (m, c) in &self.terms {
            if m.z > 0 {
                let mut lowered = m.clone();
                lowered.z -= 1;
                out.add_term(lowered, c * BigRational::from_integer(BigInt::from(m.z)));
            }
        }
        out
    }

    /// Total spatial derivative `D_z`: `D_z u_{i,j} = u_{i,j+1}`, `D_z z = 1`.
    pub fn total_derivative(&self) -> Self {
        let mut out = self.partial_z();
        for (m, c) in &self.terms {
            for &(v, _) in &m.vars {
                let (e, lowered) = m.lower(v).expect("variable present");
                let next = lowered.mul(&Monomial::var(v.prolonged()));
                out.add_term(next, c * BigRational::from_integer(BigInt::from(e)));
            }
        }
        out
    }

    /// `D_z^k p`.
    pub fn total_derivative_n(&self, k: usize) -> Self {
        let mut p = self.clone();
        for _ in 0..k {
            if p.is_zero() {
                break;
            }
            p = p.total_derivative();
        }
        p
    }

    /// Replaces every jet variable `v` by `f(v)`; `z` is kept.
    pub fn substitute(&self, mut f: impl FnMut(JetVar) -> JetPolynomial) -> Self {
        let mut cache: HashMap<JetVar, JetPolynomial> = HashMap::new();
        let mut out = JetPolynomial::zero();
        for (m, c) in &self.terms {
            let mut term = JetPolynomial::from_term(Monomial::z_power(m.z), c.clone());
            for &(v, e) in &m.vars {
                let image = cache.entry(v).or_insert_with(|| f(v));
                term = &term * &image.pow(e);
            }
            out += term;
        }
        out
    }

    /// Evaluates with floating-point jet values.
    pub fn eval(&self, z: f64, mut value: impl FnMut(JetVar) -> f64) -> f64 {
        let mut acc = 0.0;
        for (m, c) in &self.terms {
            let mut t = rational_to_f64(c) * z.powi(m.z as i32);
            for &(v, e) in &m.vars {
                t *= value(v).powi(e as i32);
            }
            acc += t;
        }
        acc
    }

    /// Exact value at a rational `z`; `None` if a jet variable occurs.
    pub fn eval_z(&self, z: &BigRational) -> Option<BigRational> {
        let mut acc = BigRational::zero();
        for (m, c) in &self.terms {
            if !m.vars.is_empty() {
                return None;
            }
            acc += c * pow_rational(z, m.z);
        }
        Some(acc)
    }

    /// Antiderivative in `z` of a `z`-only polynomial, vanishing at `z = 0`.
    pub fn antiderivative_z(&self) -> Option<Self> {
        let mut out = JetPolynomial::zero();
        for (m, c) in &self.terms {
            if !m.vars.is_empty() {
                return None;
            }
            out.add_term(
                Monomial::z_power(m.z + 1),
                c / BigRational::from_integer(BigInt::from(m.z + 1)),
            );
        }
        Some(out)
    }
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // numerator/denominator too large for a direct conversion
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

pub fn pow_rational(base: &BigRational, e: u32) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..e {
        acc *= base;
    }
    acc
}

impl AddAssign<JetPolynomial> for JetPolynomial {
    fn add_assign(&mut self, rhs: JetPolynomial) {
        for (m, c) in rhs.terms {
            self.add_term(m, c);
        }
    }
}

impl AddAssign<&JetPolynomial> for JetPolynomial {
    fn add_assign(&mut self, rhs: &JetPolynomial) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl SubAssign<&JetPolynomial> for JetPolynomial {
    fn sub_assign(&mut self, rhs: &JetPolynomial) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), -c.clone());
        }
    }
}

impl Add for &JetPolynomial {
    type Output = JetPolynomial;
    fn add(self, rhs: &JetPolynomial) -> JetPolynomial {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &JetPolynomial {
    type Output = JetPolynomial;
    fn sub(self, rhs: &JetPolynomial) -> JetPolynomial {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Mul for &JetPolynomial {
    type Output = JetPolynomial;
    fn mul(self, rhs: &JetPolynomial) -> JetPolynomial {
        let mut out = JetPolynomial::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

impl Neg for &JetPolynomial {
    type Output = JetPolynomial;
    fn neg(self) -> JetPolynomial {
        JetPolynomial {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $method:ident) => {
        impl $tr for JetPolynomial {
            type Output = JetPolynomial;
            fn $method(self, rhs: JetPolynomial) -> JetPolynomial {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&JetPolynomial> for JetPolynomial {
            type Output = JetPolynomial;
            fn $method(self, rhs: &JetPolynomial) -> JetPolynomial {
                (&self).$method(rhs)
            }
        }
        impl $tr<JetPolynomial> for &JetPolynomial {
            type Output = JetPolynomial;
            fn $method(self, rhs: JetPolynomial) -> JetPolynomial {
                self.$method(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for JetPolynomial {
    type Output = JetPolynomial;
    fn neg(self) -> JetPolynomial {
        -&self
    }
}

impl From<BigRational> for JetPolynomial {
    fn from(c: BigRational) -> Self {
        JetPolynomial::constant(c)
    }
}

impl fmt::Display for JetPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // highest degree first reads naturally
        for (idx, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if idx == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            let mut factors: Vec<String> = Vec::new();
            if !mag.is_one() || (m.vars.is_empty() && m.z == 0) {
                factors.push(mag.to_string());
            }
            for &(v, e) in &m.vars {
                if e == 1 {
                    factors.push(v.to_string());
                } else {
                    factors.push(format!("{}^{}", v, e));
                }
            }
            match m.z {
                0 => {}
                1 => factors.push("z".to_string()),
                k => factors.push(format!("z^{}", k)),
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}
