//! Pointwise evaluation of jet polynomials on grid samples.

use crate::jetexpr::{rational_to_f64, JetPolynomial};

use super::stencil::FirstDerivative;

/// Samples `[state][order][node]` of every needed discrete derivative.
#[derive(Clone, Debug)]
pub struct JetSamples {
    data: Vec<Vec<Vec<f64>>>,
}

impl JetSamples {
    pub fn new(d: &FirstDerivative, x: &[Vec<f64>], max_order: usize) -> Self {
        JetSamples {
            data: x.iter().map(|xi| d.powers(xi, max_order)).collect(),
        }
    }

    /// `D^order x_state` (state 1-based).
    pub fn get(&self, state: usize, order: usize) -> &[f64] {
        &self.data[state - 1][order]
    }
}

#[derive(Clone, Debug, PartialEq)]
struct Term {
    coeff: f64,
    z_power: i32,
    factors: Vec<(usize, usize, i32)>,
}

/// A [`JetPolynomial`] lowered to floating-point terms.
#[derive(Clone, Debug, PartialEq)]
pub struct CompiledPoly {
    terms: Vec<Term>,
    max_order: usize,
}

impl CompiledPoly {
    pub fn new(p: &JetPolynomial) -> Self {
        let terms = p
            .terms()
            .map(|(m, c)| Term {
                coeff: rational_to_f64(c),
                z_power: m.z_exponent() as i32,
                factors: m
                    .vars()
                    .iter()
                    .map(|(v, e)| (v.state(), v.order(), *e as i32))
                    .collect(),
            })
            .collect();
        CompiledPoly {
            terms,
            max_order: p.max_order().unwrap_or(0),
        }
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval_at(&self, samples: &JetSamples, node: usize, z: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let mut v = t.coeff * z.powi(t.z_power);
                for &(s, o, e) in &t.factors {
                    v *= samples.get(s, o)[node].powi(e);
                }
                v
            })
            .sum()
    }

    pub fn eval_all(&self, samples: &JetSamples, zs: &[f64]) -> Vec<f64> {
        zs.iter()
            .enumerate()
            .map(|(k, &z)| self.eval_at(samples, k, z))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::jetexpr::rat;

    #[test]
    fn matches_symbolic_evaluation() {
        let p = JetPolynomial::u(1, 1).pow(2).scale(&rat(-1, 2))
            + JetPolynomial::z() * JetPolynomial::u(2, 0);
        let g = Grid::periodic(0.0, 1.0, 32).unwrap();
        let d = FirstDerivative::new(&g, 2).unwrap();
        let zs = g.points();
        let x = vec![
            zs.iter().map(|z| (6.0 * z).sin()).collect::<Vec<_>>(),
            zs.iter().map(|z| z * z).collect(),
        ];
        let s = JetSamples::new(&d, &x, 1);
        let c = CompiledPoly::new(&p);
        for k in [0, 5, 31] {
            let expected = p.eval(zs[k], |v| s.get(v.state(), v.order())[k]);
            assert!((c.eval_at(&s, k, zs[k]) - expected).abs() < 1e-13);
        }
    }
}
