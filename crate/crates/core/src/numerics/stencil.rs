//! Finite-difference first derivative and discrete matrix operators built
//! from its powers.

use super::NumericsError;
use crate::grid::{BoundaryKind, Grid};
use crate::jetexpr::rational_to_f64;
use crate::opalg::MatDiffOp;

/// Quintic extrapolation of the ghost value `f(a - h)` from the first six nodes.
const GHOST_WEIGHTS: [f64; 6] = [6.0, -15.0, 20.0, -15.0, 6.0, -1.0];

/// Discrete `∂z`: centered differences of order 2 or 4 on periodic grids,
/// centered interior with second-order one-sided ends on bounded grids.
///
/// The end formula is the centered difference with an extrapolated ghost
/// value. Its leading error term is the interior one, `h² f'''/6`, so powers
/// of `D` remain consistent at the end nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct FirstDerivative {
    n: usize,
    h: f64,
    bc: BoundaryKind,
    order: usize,
}

impl FirstDerivative {
    pub fn new(grid: &Grid, order: usize) -> Result<Self, NumericsError> {
        match (grid.boundary(), order) {
            (BoundaryKind::Periodic, 2 | 4) | (BoundaryKind::Bounded, 2) => {}
            (bc, order) => return Err(NumericsError::UnsupportedStencil { bc, order }),
        }
        grid.check_order(2)?;
        Ok(FirstDerivative {
            n: grid.len(),
            h: grid.h(),
            bc: grid.boundary(),
            order,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn apply_into(&self, f: &[f64], out: &mut [f64]) {
        let n = self.n;
        let h = self.h;
        match (self.bc, self.order) {
            (BoundaryKind::Periodic, 2) => {
                for i in 0..n {
                    out[i] = (f[(i + 1) % n] - f[(i + n - 1) % n]) / (2.0 * h);
                }
            }
            (BoundaryKind::Periodic, _) => {
                for i in 0..n {
                    let p1 = f[(i + 1) % n];
                    let p2 = f[(i + 2) % n];
                    let m1 = f[(i + n - 1) % n];
                    let m2 = f[(i + n - 2) % n];
                    out[i] = (-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * h);
                }
            }
            (BoundaryKind::Bounded, _) => {
                let mut ghost_a = 0.0;
                let mut ghost_b = 0.0;
                for (j, c) in GHOST_WEIGHTS.iter().enumerate() {
                    ghost_a += c * f[j];
                    ghost_b += c * f[n - 1 - j];
                }
                out[0] = (f[1] - ghost_a) / (2.0 * h);
                for i in 1..n - 1 {
                    out[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
                }
                out[n - 1] = (ghost_b - f[n - 2]) / (2.0 * h);
            }
        }
    }

    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.apply_into(f, &mut out);
        out
    }

    /// `[f, D f, …, D^k f]` with `D^k` the k-fold composition.
    pub fn powers(&self, f: &[f64], k: usize) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(k + 1);
        out.push(f.to_vec());
        for _ in 0..k {
            let next = self.apply(out.last().expect("nonempty"));
            out.push(next);
        }
        out
    }

    /// Dense matrix of `D`, row-major.
    pub fn matrix(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| {
                let mut row = vec![0.0; self.n];
                for (j, r) in row.iter_mut().enumerate() {
                    let mut e = vec![0.0; self.n];
                    e[j] = 1.0;
                    *r = self.apply(&e)[i];
                }
                row
            })
            .collect()
    }
}

/// A [`MatDiffOp`] with `∂z^k` replaced by `D^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteOp {
    rows: usize,
    cols: usize,
    coeffs: Vec<(usize, Vec<Vec<f64>>)>,
}

impl DiscreteOp {
    pub fn new(op: &MatDiffOp) -> Self {
        DiscreteOp {
            rows: op.rows(),
            cols: op.cols(),
            coeffs: op
                .stored_coeffs()
                .map(|(k, a)| {
                    let m = (0..a.rows())
                        .map(|i| {
                            (0..a.cols())
                                .map(|j| rational_to_f64(a.get(i, j)))
                                .collect()
                        })
                        .collect();
                    (k, m)
                })
                .collect(),
        }
    }

    pub fn order(&self) -> usize {
        self.coeffs.iter().map(|(k, _)| *k).max().unwrap_or(0)
    }

    pub fn apply(&self, d: &FirstDerivative, e: &[Vec<f64>]) -> Vec<Vec<f64>> {
        debug_assert_eq!(e.len(), self.cols);
        let n = d.len();
        let order = self.order();
        let derivs: Vec<Vec<Vec<f64>>> = e.iter().map(|ej| d.powers(ej, order)).collect();
        let mut out = vec![vec![0.0; n]; self.rows];
        for (k, a) in &self.coeffs {
            for (i, oi) in out.iter_mut().enumerate() {
                for (j, dj) in derivs.iter().enumerate() {
                    let c = a[i][j];
                    if c != 0.0 {
                        for (o, v) in oi.iter_mut().zip(&dj[*k]) {
                            *o += c * v;
                        }
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn periodic_second_order_is_skew_circulant() {
        let g = Grid::periodic(0.0, 1.0, 16).unwrap();
        let d = FirstDerivative::new(&g, 2).unwrap();
        let m = d.matrix();
        let h = g.h();
        for i in 0..16 {
            for j in 0..16 {
                assert_eq!(m[i][j], -m[j][i]);
                assert_eq!(m[i][j], m[(i + 1) % 16][(j + 1) % 16]);
            }
        }
        assert!((m[0][1] - 1.0 / (2.0 * h)).abs() < 1e-12);
        assert!((m[0][15] + 1.0 / (2.0 * h)).abs() < 1e-12);
        let d4 = FirstDerivative::new(&g, 4).unwrap();
        let m4 = d4.matrix();
        for i in 0..16 {
            for j in 0..16 {
                assert_eq!(m4[i][j], -m4[j][i]);
            }
        }
    }

    #[test]
    fn orders_of_accuracy() {
        let err = |n: usize, bc: BoundaryKind, order: usize| {
            let b = 2.0 * std::f64::consts::PI;
            let g = Grid::new(0.0, b, n, bc).unwrap();
            let d = FirstDerivative::new(&g, order).unwrap();
            let f: Vec<f64> = g.points().iter().map(|z| z.sin()).collect();
            let df = d.apply(&f);
            g.points()
                .iter()
                .zip(&df)
                .map(|(z, v)| (v - z.cos()).abs())
                .fold(0.0, f64::max)
        };
        for (bc, order, expected) in [
            (BoundaryKind::Periodic, 2, 2.0),
            (BoundaryKind::Periodic, 4, 4.0),
            (BoundaryKind::Bounded, 2, 2.0),
        ] {
            let rate = (err(64, bc, order) / err(128, bc, order)).log2();
            assert!((rate - expected).abs() < 0.2, "{bc:?} {order}: {rate}");
        }
    }

    #[test]
    fn composed_powers_stay_second_order_at_the_ends() {
        let err = |n: usize| {
            let g = Grid::bounded(0.0, 1.0, n).unwrap();
            let d = FirstDerivative::new(&g, 2).unwrap();
            let f: Vec<f64> = g.points().iter().map(|z| (2.0 * z).sin()).collect();
            let d3 = d.powers(&f, 3).pop().unwrap();
            g.points()
                .iter()
                .zip(&d3)
                .map(|(z, v)| (v + 8.0 * (2.0 * z).cos()).abs())
                .fold(0.0, f64::max)
        };
        let rate = (err(100) / err(200)).log2();
        assert!(rate > 1.8, "{rate}");
    }

    #[test]
    fn rejects_unsupported_configurations() {
        let g = Grid::bounded(0.0, 1.0, 20).unwrap();
        assert!(FirstDerivative::new(&g, 4).is_err());
        assert!(FirstDerivative::new(&Grid::periodic(0.0, 1.0, 20).unwrap(), 3).is_err());
    }
}
