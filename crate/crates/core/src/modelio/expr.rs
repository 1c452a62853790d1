//! Expression trees of the model language.

use std::fmt;

use num::{BigInt, BigRational, One, Signed, Zero};

use crate::jetexpr::JetPolynomial;

/// Parsed expression. Parentheses are not kept; the printer inserts the
/// minimal set needed to reproduce the same tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    /// Nonnegative integer literal.
    Num(BigInt),
    /// A state, a parameter, `z` or `d`.
    Ident(String),
    /// `dz(x)` for `order = 1`, `dzK(x)` otherwise.
    Jet {
        name: String,
        order: usize,
    },
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
}

impl Expr {
    pub fn num(n: i64) -> Self {
        Expr::Num(BigInt::from(n))
    }

    pub fn ident(s: &str) -> Self {
        Expr::Ident(s.to_string())
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            Expr::Num(_) | Expr::Ident(_) | Expr::Jet { .. } => 5,
        }
    }

    /// `p`, `p/q`, `-p` or `-p/q`, the sign attached to the numerator.
    pub fn rational(r: &BigRational) -> Self {
        let mut numer = Expr::Num(r.numer().abs());
        if r.is_negative() {
            numer = Expr::Neg(Box::new(numer));
        }
        if r.denom().is_one() {
            numer
        } else {
            Expr::Div(Box::new(numer), Box::new(Expr::Num(r.denom().clone())))
        }
    }

    /// Calls `f` on every identifier and jet reference.
    pub fn visit_names(&self, f: &mut impl FnMut(&str, Option<usize>)) {
        match self {
            Expr::Num(_) => {}
            Expr::Ident(s) => f(s, None),
            Expr::Jet { name, order } => f(name, Some(*order)),
            Expr::Neg(a) | Expr::Pow(a, _) => a.visit_names(f),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.visit_names(f);
                b.visit_names(f);
            }
        }
    }

    /// Converts to a polynomial. `leaf` resolves identifiers and jet
    /// references; divisors must reduce to nonzero constants.
    pub fn to_poly(
        &self,
        leaf: &impl Fn(&str, usize) -> Option<JetPolynomial>,
    ) -> Result<JetPolynomial, EvalError> {
        Ok(match self {
            Expr::Num(n) => JetPolynomial::constant(BigRational::from_integer(n.clone())),
            Expr::Ident(s) => leaf(s, 0).ok_or_else(|| EvalError::Unknown(s.clone()))?,
            Expr::Jet { name, order } => {
                leaf(name, *order).ok_or_else(|| EvalError::Unknown(name.clone()))?
            }
            Expr::Neg(a) => -a.to_poly(leaf)?,
            Expr::Add(a, b) => a.to_poly(leaf)? + b.to_poly(leaf)?,
            Expr::Sub(a, b) => a.to_poly(leaf)? - b.to_poly(leaf)?,
            Expr::Mul(a, b) => a.to_poly(leaf)? * b.to_poly(leaf)?,
            Expr::Div(a, b) => {
                let q = b
                    .to_poly(leaf)?
                    .as_constant()
                    .ok_or(EvalError::NonConstantDivisor)?;
                if q.is_zero() {
                    return Err(EvalError::DivisionByZero);
                }
                a.to_poly(leaf)?.scale(&q.recip())
            }
            Expr::Pow(a, e) => a.to_poly(leaf)?.pow(*e),
        })
    }

    /// Builds `Σ c·m` from a polynomial, writing each jet variable with `name`.
    pub fn from_poly(p: &JetPolynomial, name: &impl Fn(usize, usize) -> Expr) -> Self {
        let mut out: Option<Expr> = None;
        for (m, c) in p.terms() {
            let mut factors: Vec<Expr> = Vec::new();
            for &(v, e) in m.vars() {
                factors.push(power(name(v.state(), v.order()), e));
            }
            if m.z_exponent() > 0 {
                factors.push(power(Expr::ident("z"), m.z_exponent()));
            }
            let first_negative = out.is_none() && c.is_negative();
            let coeff = if out.is_none() { c.clone() } else { c.abs() };
            let term = if factors.is_empty() {
                Expr::rational(&coeff)
            } else {
                if coeff.abs().is_one() && first_negative {
                    factors[0] = Expr::Neg(Box::new(factors[0].clone()));
                }
                let mut it = factors.into_iter();
                let first = it.next().expect("nonempty");
                let prod = it.fold(first, |acc, f| Expr::Mul(Box::new(acc), Box::new(f)));
                if coeff.abs().is_one() {
                    prod
                } else {
                    Expr::Mul(Box::new(Expr::rational(&coeff)), Box::new(prod))
                }
            };
            out = Some(match out {
                None => term,
                Some(acc) if c.is_negative() => Expr::Sub(Box::new(acc), Box::new(term)),
                Some(acc) => Expr::Add(Box::new(acc), Box::new(term)),
            });
        }
        out.unwrap_or_else(|| Expr::num(0))
    }
}

fn power(base: Expr, e: u32) -> Expr {
    if e == 1 {
        base
    } else {
        Expr::Pow(Box::new(base), e)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EvalError {
    Unknown(String),
    NonConstantDivisor,
    DivisionByZero,
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::Unknown(s) => write!(f, "unknown name `{s}`"),
            EvalError::NonConstantDivisor => write!(f, "divisor must be a constant"),
            EvalError::DivisionByZero => write!(f, "division by zero"),
        }
    }
}

fn write_child(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.precedence();
        match self {
            Expr::Num(n) => write!(f, "{n}"),
            Expr::Ident(s) => write!(f, "{s}"),
            Expr::Jet { name, order: 1 } => write!(f, "dz({name})"),
            Expr::Jet { name, order } => write!(f, "dz{order}({name})"),
            Expr::Neg(a) => {
                write!(f, "-")?;
                write_child(f, a, a.precedence() < p)
            }
            Expr::Pow(a, e) => {
                write_child(f, a, a.precedence() < 5)?;
                write!(f, "^{e}")
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                let op = match self {
                    Expr::Add(..) => " + ",
                    Expr::Sub(..) => " - ",
                    Expr::Mul(..) => "*",
                    _ => "/",
                };
                write_child(f, a, a.precedence() < p)?;
                write!(f, "{op}")?;
                write_child(f, b, b.precedence() <= p)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jetexpr::rat;

    fn leaf(s: &str, order: usize) -> Option<JetPolynomial> {
        match s {
            "u" => Some(JetPolynomial::u(1, order)),
            "z" if order == 0 => Some(JetPolynomial::z()),
            _ => None,
        }
    }

    #[test]
    fn printing_keeps_structure() {
        let u = || Box::new(Expr::ident("u"));
        let e = Expr::Sub(u(), Box::new(Expr::Sub(u(), u())));
        assert_eq!(e.to_string(), "u - (u - u)");
        let e = Expr::Neg(Box::new(Expr::Mul(u(), u())));
        assert_eq!(e.to_string(), "-(u*u)");
        let e = Expr::Pow(Box::new(Expr::Pow(u(), 2)), 3);
        assert_eq!(e.to_string(), "(u^2)^3");
        let e = Expr::Mul(
            Box::new(Expr::rational(&rat(-1, 6))),
            Box::new(Expr::Jet {
                name: "u".into(),
                order: 2,
            }),
        );
        assert_eq!(e.to_string(), "-1/6*dz2(u)");
    }

    #[test]
    fn polynomial_round_trip() {
        let u = JetPolynomial::u;
        let p = u(1, 1).pow(2).scale(&rat(-1, 6)) + u(1, 0).pow(3).scale(&rat(4, 9))
            - JetPolynomial::z();
        let e = Expr::from_poly(&p, &|_, order| match order {
            0 => Expr::ident("u"),
            k => Expr::Jet {
                name: "u".into(),
                order: k,
            },
        });
        assert_eq!(e.to_poly(&leaf).unwrap(), p);
        assert_eq!(
            Expr::from_poly(&JetPolynomial::zero(), &|_, _| Expr::num(0)),
            Expr::num(0)
        );
    }

    #[test]
    fn division_needs_a_nonzero_constant() {
        let u = || Box::new(Expr::ident("u"));
        assert_eq!(
            Expr::Div(u(), u()).to_poly(&leaf),
            Err(EvalError::NonConstantDivisor)
        );
        assert_eq!(
            Expr::Div(u(), Box::new(Expr::num(0))).to_poly(&leaf),
            Err(EvalError::DivisionByZero)
        );
    }
}
