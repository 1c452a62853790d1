//! Shared generators for integration tests and the acceptance harness.
#![allow(dead_code)]

use jetphs::jetexpr::{int, rat, DensityProfile, JetPolynomial, JetVar};
use jetphs::lift::LiftSpec;
use jetphs::matrix::RatMatrix;
use jetphs::modelio::{DissipationDoc, Expr, ModelDoc};
use jetphs::opalg::MatDiffOp;
use jetphs::system::{Dissipation, PhsSystem, Resistance};
use num::BigRational;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> RatMatrix {
    let mut m = RatMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            if rng.gen_bool(0.6) {
                m.set(i, j, rat(rng.gen_range(-3..=3), rng.gen_range(1..=2)));
            }
        }
    }
    m
}

pub fn random_op(rng: &mut impl Rng, rows: usize, cols: usize, order: usize) -> MatDiffOp {
    MatDiffOp::from_coeffs(
        rows,
        cols,
        (0..=order).map(|k| (k, random_matrix(rng, rows, cols))),
    )
}

/// `A − A*` for a random `A`: formally skew-adjoint of order at most `order`.
pub fn random_skew(rng: &mut impl Rng, n: usize, order: usize) -> MatDiffOp {
    let a = random_op(rng, n, n, order);
    a.sub(&a.formal_adjoint()).expect("square")
}

/// `{(i, 0)}` plus a random set of higher jet coordinates.
pub fn random_spec(rng: &mut impl Rng, n: usize, max_order: usize) -> LiftSpec {
    let mut entries: Vec<JetVar> = (1..=n).map(|i| JetVar::new(i, 0)).collect();
    for i in 1..=n {
        for j in 1..=max_order {
            if rng.gen_bool(0.35) {
                entries.push(JetVar::new(i, j));
            }
        }
    }
    LiftSpec::new(entries).expect("distinct entries")
}

/// A density whose support is exactly `spec`.
pub fn density_on(rng: &mut impl Rng, spec: &LiftSpec) -> DensityProfile {
    let h = spec
        .entries()
        .iter()
        .fold(JetPolynomial::zero(), |acc, &v| {
            acc + JetPolynomial::var(v)
                .pow(2)
                .scale(&rat(rng.gen_range(1..=4), 2))
        });
    DensityProfile::new(h)
}

/// Random system with `n ≤ 5`, `m ≤ 3`, a random lift set and, optionally,
/// a random `𝒢ᵣ` of order `≤ 2` with `R = I`.
pub fn random_system(rng: &mut impl Rng, dissipative: bool) -> (PhsSystem, LiftSpec) {
    let n = rng.gen_range(1..=5);
    let m = rng.gen_range(0..=3);
    let spec = random_spec(rng, n, 2);
    let j = random_skew(rng, n, m);
    let mut system = PhsSystem::new(j, density_on(rng, &spec)).expect("skew by construction");
    if dissipative {
        let dg = rng.gen_range(1..=2);
        let mg = rng.gen_range(0..=2);
        let g = random_op(rng, n, dg, mg);
        let r = Resistance::new(
            (0..dg)
                .map(|i| {
                    (0..dg)
                        .map(|j| JetPolynomial::constant(int(i64::from(i == j))))
                        .collect()
                })
                .collect(),
        )
        .expect("constant");
        system = system
            .with_dissipation(Dissipation { g, r })
            .expect("n rows");
    }
    (system, spec)
}

/// Pads the shorter coefficient list with zeros before comparing.
pub fn coeffs_equal(a: &[RatMatrix], b: &[RatMatrix]) -> bool {
    let shape = a.first().or(b.first()).map(RatMatrix::shape);
    let zero = shape.map(|(r, c)| RatMatrix::zeros(r, c));
    (0..a.len().max(b.len())).all(|k| a.get(k).or(zero.as_ref()) == b.get(k).or(zero.as_ref()))
}

const STATE_NAMES: [&str; 6] = ["u", "v", "w", "q", "p", "eta"];
const PARAM_NAMES: [&str; 5] = ["k", "T", "rhoA", "kappa", "c1"];

fn random_rational(rng: &mut impl Rng, nonzero: bool) -> BigRational {
    loop {
        let r = rat(rng.gen_range(-9..=9), rng.gen_range(1..=6));
        if !nonzero || r != int(0) {
            return r;
        }
    }
}

fn b(e: Expr) -> Box<Expr> {
    Box::new(e)
}

fn random_expr(rng: &mut impl Rng, depth: u32, states: &[String], params: &[String]) -> Expr {
    if depth == 0 || rng.gen_bool(0.25) {
        return match rng.gen_range(0..5) {
            0 => Expr::num(rng.gen_range(0..12)),
            1 if !params.is_empty() => Expr::Ident(params.choose(rng).expect("nonempty").clone()),
            2 => Expr::Jet {
                name: states.choose(rng).expect("nonempty").clone(),
                order: rng.gen_range(1..=3),
            },
            3 => Expr::ident("z"),
            _ => Expr::Ident(states.choose(rng).expect("nonempty").clone()),
        };
    }
    let mut sub = || random_expr(rng, depth - 1, states, params);
    let (x, y) = (sub(), sub());
    match rng.gen_range(0..7) {
        0 => Expr::Neg(b(x)),
        1 => Expr::Add(b(x), b(y)),
        2 => Expr::Sub(b(x), b(y)),
        3 => Expr::Mul(b(x), b(y)),
        4 => {
            let divisor = match rng.gen_range(0..3) {
                0 if !params.is_empty() => {
                    Expr::Ident(params.choose(rng).expect("nonempty").clone())
                }
                1 => Expr::Neg(b(Expr::num(rng.gen_range(1..9)))),
                _ => Expr::num(rng.gen_range(1..9)),
            };
            Expr::Div(b(x), b(divisor))
        }
        _ => Expr::Pow(b(x), rng.gen_range(0..=3)),
    }
}

fn with_d(e: Expr) -> Expr {
    match e {
        Expr::Ident(s) if s == "z" => Expr::ident("d"),
        Expr::Neg(a) => Expr::Neg(b(with_d(*a))),
        Expr::Pow(a, k) => Expr::Pow(b(with_d(*a)), k),
        Expr::Add(x, y) => Expr::Add(b(with_d(*x)), b(with_d(*y))),
        Expr::Sub(x, y) => Expr::Sub(b(with_d(*x)), b(with_d(*y))),
        Expr::Mul(x, y) => Expr::Mul(b(with_d(*x)), b(with_d(*y))),
        Expr::Div(x, y) => Expr::Div(b(with_d(*x)), b(with_d(*y))),
        e => e,
    }
}

/// Operator entries written as polynomials in `d`.
pub fn operator_rows(op: &MatDiffOp) -> Vec<Vec<Expr>> {
    op.entries()
        .iter()
        .map(|row| {
            row.iter()
                .map(|p| {
                    let poly = p
                        .iter()
                        .enumerate()
                        .fold(JetPolynomial::zero(), |acc, (k, c)| {
                            acc + JetPolynomial::z().pow(k as u32).scale(c)
                        });
                    with_d(Expr::from_poly(&poly, &|_, _| unreachable!("z-only")))
                })
                .collect()
        })
        .collect()
}

/// A random valid model document.
pub fn random_model(rng: &mut impl Rng) -> ModelDoc {
    let n = rng.gen_range(1..=3);
    let states: Vec<String> = STATE_NAMES
        .choose_multiple(rng, n)
        .map(|s| s.to_string())
        .collect();
    let np = rng.gen_range(0..=3);
    let params: Vec<(String, BigRational)> = PARAM_NAMES
        .choose_multiple(rng, np)
        .map(|s| (s.to_string(), random_rational(rng, true)))
        .collect();
    let names: Vec<String> = params.iter().map(|(k, _)| k.clone()).collect();
    let a = random_rational(rng, false);
    let len = rat(rng.gen_range(1..=12), rng.gen_range(1..=3));
    let order = rng.gen_range(0..=3);
    let dissipation = rng.gen_bool(0.4).then(|| {
        let dg = rng.gen_range(1..=2);
        let mg = rng.gen_range(0..=2);
        let g = random_op(rng, n, dg, mg);
        let r = (0..dg)
            .map(|i| {
                (0..dg)
                    .map(|j| {
                        if i != j {
                            return Expr::num(0);
                        }
                        match rng.gen_range(0..3) {
                            0 => Expr::num(rng.gen_range(0..5)),
                            1 => Expr::Add(b(Expr::Pow(b(Expr::ident("z")), 2)), b(Expr::num(1))),
                            _ if !names.is_empty() => {
                                Expr::Pow(b(Expr::Ident(names[0].clone())), 2)
                            }
                            _ => Expr::num(2),
                        }
                    })
                    .collect()
            })
            .collect();
        DissipationDoc {
            g: operator_rows(&g),
            r,
        }
    });
    ModelDoc {
        name: format!("model_{}", rng.gen_range(0..1000)),
        domain: (a.clone(), a + len),
        operator: operator_rows(&random_skew(rng, n, order)),
        hamiltonian: random_expr(rng, 4, &states, &names),
        states,
        params,
        dissipation,
    }
}
