//! Method-of-lines semi-discretization with balance monitors.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::compiled::{CompiledPoly, JetSamples};
use super::stencil::{DiscreteOp, FirstDerivative};
use super::NumericsError;
use crate::grid::{BoundaryKind, Grid};
use crate::jetexpr::JetVar;
use crate::opalg::MatDiffOp;
use crate::ports::{build_port_frame, PortFrame};
use crate::system::PhsSystem;

/// Boundary treatment on bounded grids.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Closure {
    /// No boundary condition; one-sided stencils at the ends.
    Free,
    /// Efforts and resistive efforts vanish at the end nodes, which are frozen.
    ZeroTrace,
}

#[derive(Clone, Debug)]
struct DiscreteDissipation {
    g: DiscreteOp,
    g_adj: DiscreteOp,
    r: Vec<DMatrix<f64>>,
}

#[derive(Clone, Debug)]
pub struct SemiDiscreteSystem {
    grid: Grid,
    d: FirstDerivative,
    n: usize,
    closure: Closure,
    zs: Vec<f64>,
    op: DiscreteOp,
    density: CompiledPoly,
    partials: Vec<(JetVar, CompiledPoly)>,
    efforts: Vec<CompiledPoly>,
    density_order: usize,
    jet_order: usize,
    dissipation: Option<DiscreteDissipation>,
    frame: PortFrame,
}

/// Everything computed from one state in a right-hand-side evaluation.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub xdot: Vec<Vec<f64>>,
    /// `δℋ` samples, zeroed at the end nodes under [`Closure::ZeroTrace`].
    pub efforts: Vec<Vec<f64>>,
    /// `F = −𝒢ᵣ* e`.
    pub flow_r: Vec<Vec<f64>>,
    /// `φ = R F`.
    pub effort_r: Vec<Vec<f64>>,
    samples: JetSamples,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Balance {
    pub dh_dt: f64,
    pub port_power: f64,
    pub dissipated: f64,
    /// `dh_dt − port_power + dissipated`.
    pub defect: f64,
    /// Smallest pointwise `φᵀF` (0 without dissipation).
    pub min_phi_f: f64,
}

pub fn discretize(
    system: &PhsSystem,
    grid: &Grid,
    stencil_order: usize,
) -> Result<SemiDiscreteSystem, NumericsError> {
    let d = FirstDerivative::new(grid, stencil_order)?;
    let n = system.n();
    let profile = system.density();
    let md = profile.max_order();
    let (port_op, dissipation) = match system.dissipation() {
        None => (system.operator().clone(), None),
        Some(diss) => {
            let zs = grid.points();
            for &z in &zs {
                let min_eigenvalue = diss.r.min_eigenvalue(z);
                if min_eigenvalue < -1e-12 {
                    return Err(NumericsError::ResistanceIndefinite { z, min_eigenvalue });
                }
            }
            let dg = diss.g.cols();
            let composite = MatDiffOp::block(
                system.operator(),
                &diss.g,
                &diss.g.formal_adjoint().neg(),
                &MatDiffOp::zero(dg, dg),
            )
            .expect("shapes checked by the system");
            let dd = DiscreteDissipation {
                g: DiscreteOp::new(&diss.g),
                g_adj: DiscreteOp::new(&diss.g.formal_adjoint()),
                r: zs.iter().map(|&z| diss.r.eval(z)).collect(),
            };
            (composite, Some(dd))
        }
    };
    let frame = build_port_frame(&port_op)?;
    let stencil_reach = [port_op.order(), 2 * md, 1].into_iter().max().unwrap_or(1);
    grid.check_order(stencil_reach)?;
    let efforts: Vec<CompiledPoly> = system.efforts().iter().map(CompiledPoly::new).collect();
    let jet_order = efforts
        .iter()
        .map(CompiledPoly::max_order)
        .max()
        .unwrap_or(0)
        .max(md);
    Ok(SemiDiscreteSystem {
        grid: grid.clone(),
        d,
        n,
        closure: Closure::Free,
        zs: grid.points(),
        op: DiscreteOp::new(system.operator()),
        density: CompiledPoly::new(profile.density()),
        partials: profile
            .support()
            .iter()
            .map(|&v| (v, CompiledPoly::new(&profile.density().partial(v))))
            .collect(),
        efforts,
        density_order: md,
        jet_order,
        dissipation,
        frame,
    })
}

fn zero_ends(v: &mut [f64]) {
    if let Some(first) = v.first_mut() {
        *first = 0.0;
    }
    if let Some(last) = v.last_mut() {
        *last = 0.0;
    }
}

impl SemiDiscreteSystem {
    pub fn with_closure(mut self, closure: Closure) -> Result<Self, NumericsError> {
        if closure == Closure::ZeroTrace && self.grid.boundary() != BoundaryKind::Bounded {
            return Err(NumericsError::ZeroTraceNeedsBoundedGrid);
        }
        self.closure = closure;
        Ok(self)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn derivative(&self) -> &FirstDerivative {
        &self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn closure(&self) -> Closure {
        self.closure
    }

    pub fn frame(&self) -> &PortFrame {
        &self.frame
    }

    pub fn is_dissipative(&self) -> bool {
        self.dissipation.is_some()
    }

    pub fn check_state(&self, x: &[Vec<f64>]) -> Result<(), NumericsError> {
        if x.len() != self.n || x.iter().any(|xi| xi.len() != self.grid.len()) {
            return Err(NumericsError::StateShape {
                states: self.n,
                points: self.grid.len(),
            });
        }
        Ok(())
    }

    /// Samples a state given as one function of `z` per component.
    pub fn sample(&self, f: impl Fn(usize, f64) -> f64) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| self.zs.iter().map(|&z| f(i, z)).collect())
            .collect()
    }

    pub fn evaluate(&self, x: &[Vec<f64>]) -> Evaluation {
        let samples = JetSamples::new(&self.d, x, self.jet_order);
        let zero_trace = self.closure == Closure::ZeroTrace;
        let mut efforts: Vec<Vec<f64>> = self
            .efforts
            .iter()
            .map(|e| e.eval_all(&samples, &self.zs))
            .collect();
        if zero_trace {
            efforts.iter_mut().for_each(|e| zero_ends(e));
        }
        let mut xdot = self.op.apply(&self.d, &efforts);
        let mut flow_r = Vec::new();
        let mut effort_r = Vec::new();
        if let Some(diss) = &self.dissipation {
            flow_r = diss.g_adj.apply(&self.d, &efforts);
            flow_r.iter_mut().flatten().for_each(|v| *v = -*v);
            let dg = flow_r.len();
            effort_r = vec![vec![0.0; self.zs.len()]; dg];
            for (k, r) in diss.r.iter().enumerate() {
                let f = DVector::from_fn(dg, |c, _| flow_r[c][k]);
                let phi = r * f;
                for c in 0..dg {
                    effort_r[c][k] = phi[c];
                }
            }
            if zero_trace {
                effort_r.iter_mut().for_each(|e| zero_ends(e));
            }
            let g_phi = diss.g.apply(&self.d, &effort_r);
            for (xi, gi) in xdot.iter_mut().zip(g_phi) {
                xi.iter_mut().zip(gi).for_each(|(a, b)| *a += b);
            }
        }
        if zero_trace {
            xdot.iter_mut().for_each(|v| zero_ends(v));
        }
        Evaluation {
            xdot,
            efforts,
            flow_r,
            effort_r,
            samples,
        }
    }

    pub fn rhs(&self, x: &[Vec<f64>]) -> Vec<Vec<f64>> {
        self.evaluate(x).xdot
    }

    /// Quadrature of the density.
    pub fn hamiltonian(&self, x: &[Vec<f64>]) -> f64 {
        let samples = JetSamples::new(&self.d, x, self.density_order);
        self.grid
            .integrate(&self.density.eval_all(&samples, &self.zs))
    }

    pub fn balance(&self, x: &[Vec<f64>]) -> Balance {
        let ev = self.evaluate(x);
        self.balance_of(&ev)
    }

    /// Balance terms from an existing evaluation.
    pub fn balance_of(&self, ev: &Evaluation) -> Balance {
        let npts = self.zs.len();
        let mut power = vec![0.0; npts];
        for (v, p) in &self.partials {
            let dx = self.d.powers(&ev.xdot[v.state() - 1], v.order());
            let dxk = &dx[v.order()];
            for k in 0..npts {
                power[k] += p.eval_at(&ev.samples, k, self.zs[k]) * dxk[k];
            }
        }
        let dh_dt = self.grid.integrate(&power);

        let mut pointwise = vec![0.0; npts];
        for (phi, f) in ev.effort_r.iter().zip(&ev.flow_r) {
            for k in 0..npts {
                pointwise[k] += phi[k] * f[k];
            }
        }
        let dissipated = if ev.effort_r.is_empty() {
            0.0
        } else {
            self.grid.integrate(&pointwise)
        };
        let min_phi_f = if ev.effort_r.is_empty() {
            0.0
        } else {
            pointwise.iter().copied().fold(f64::INFINITY, f64::min)
        };

        let port_power = match self.grid.boundary() {
            BoundaryKind::Periodic => 0.0,
            BoundaryKind::Bounded => {
                let (ta, tb) = self.boundary_traces(ev);
                self.frame.power(&ta, &tb)
            }
        };
        Balance {
            dh_dt,
            port_power,
            dissipated,
            defect: dh_dt - port_power + dissipated,
            min_phi_f,
        }
    }

    /// Discrete `τ` of `(e; φ)` at both end nodes.
    pub fn boundary_traces(&self, ev: &Evaluation) -> (Vec<f64>, Vec<f64>) {
        let m = self.frame.order();
        let last = self.zs.len() - 1;
        let fields: Vec<&Vec<f64>> = ev.efforts.iter().chain(ev.effort_r.iter()).collect();
        let derivs: Vec<Vec<Vec<f64>>> = fields
            .iter()
            .map(|f| self.d.powers(f, m.saturating_sub(1)))
            .collect();
        let mut ta = Vec::with_capacity(m * fields.len());
        let mut tb = Vec::with_capacity(m * fields.len());
        for r in 0..m {
            for dv in &derivs {
                ta.push(dv[r][0]);
                tb.push(dv[r][last]);
            }
        }
        (ta, tb)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jetexpr::{rat, DensityProfile, JetPolynomial};
    use crate::lift::{infer_lift_spec, lift_dissipative, lift_hamiltonian};
    use crate::opalg::tests::c;
    use crate::system::{Dissipation, Resistance};

    fn u(i: usize, j: usize) -> JetPolynomial {
        JetPolynomial::u(i, j)
    }

    /// ½(p²/ρA + k u² + T u_z²) with ρA = 2, k = 3, T = 5.
    fn rod() -> PhsSystem {
        let h = u(2, 0).pow(2).scale(&rat(1, 4))
            + u(1, 0).pow(2).scale(&rat(3, 2))
            + u(1, 1).pow(2).scale(&rat(5, 2));
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

    #[test]
    fn rod_rhs_matches_hand_coded_scheme() {
        let grid = Grid::bounded(0.0, 1.0, 201).unwrap();
        let sd = discretize(&rod(), &grid, 2).unwrap();
        let x = sd.sample(|i, z| if i == 0 { (3.0 * z).sin() } else { z * z - 0.5 });
        let rhs = sd.rhs(&x);
        // hand-coded: u_t = p/ρA, p_t = −k u + T D(D u)
        let h = grid.h();
        let dd = |f: &[f64]| -> Vec<f64> {
            let n = f.len();
            let mut out = vec![0.0; n];
            let ghost = |g: &dyn Fn(usize) -> f64| {
                6.0 * g(0) - 15.0 * g(1) + 20.0 * g(2) - 15.0 * g(3) + 6.0 * g(4) - g(5)
            };
            out[0] = (f[1] - ghost(&|j| f[j])) / (2.0 * h);
            out[n - 1] = (ghost(&|j| f[n - 1 - j]) - f[n - 2]) / (2.0 * h);
            for i in 1..n - 1 {
                out[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
            }
            out
        };
        let uzz = dd(&dd(&x[0]));
        for k in 0..grid.len() {
            assert!((rhs[0][k] - x[1][k] / 2.0).abs() < 1e-13);
            let p_t = -3.0 * x[0][k] + 5.0 * uzz[k];
            assert!((rhs[1][k] - p_t).abs() <= 1e-12 * (1.0 + p_t.abs()), "{k}");
        }
    }

    #[test]
    fn periodic_lifted_rod_is_conservative() {
        let sys = rod();
        let lifted = lift_hamiltonian(&sys, &infer_lift_spec(sys.density(), 2))
            .unwrap()
            .to_system();
        let grid = Grid::periodic(0.0, 1.0, 64).unwrap();
        for order in [2, 4] {
            let sd = discretize(&lifted, &grid, order).unwrap();
            let tau = std::f64::consts::TAU;
            let x = sd.sample(|i, z| ((i + 1) as f64 * tau * z).sin() + 0.1 * i as f64);
            let b = sd.balance(&x);
            assert!(b.dh_dt.abs() < 1e-10 && b.port_power == 0.0, "{b:?}");
        }
    }

    #[test]
    fn compact_state_on_lifted_rod_has_no_defect() {
        let sys = rod();
        let lifted = lift_hamiltonian(&sys, &infer_lift_spec(sys.density(), 2))
            .unwrap()
            .to_system();
        let grid = Grid::bounded(0.0, 1.0, 201).unwrap();
        let sd = discretize(&lifted, &grid, 2).unwrap();
        let bump = |z: f64| {
            let s = (z - 0.5) / 0.3;
            if s.abs() < 1.0 {
                (1.0 - s * s).powi(6)
            } else {
                0.0
            }
        };
        let x = sd.sample(|i, z| (i as f64 + 1.0) * bump(z));
        let b = sd.balance(&x);
        assert!(b.defect.abs() <= 1e-10, "{b:?}");
    }

    #[test]
    fn zero_trace_allen_cahn_dissipates_pointwise() {
        let sys = allen_cahn();
        let dl = lift_dissipative(&sys, &infer_lift_spec(sys.density(), 1)).unwrap();
        let grid = Grid::bounded(0.0, 8.0, 161).unwrap();
        let sd = discretize(&dl.to_system(), &grid, 2)
            .unwrap()
            .with_closure(Closure::ZeroTrace)
            .unwrap();
        let x = sd.sample(|i, z| {
            if i == 0 {
                (0.7 * z).sin()
            } else {
                0.7 * (0.7 * z).cos()
            }
        });
        let b = sd.balance(&x);
        assert!(b.min_phi_f >= 0.0);
        assert!(b.port_power == 0.0);
        assert!(b.dh_dt <= 0.0);
        assert!(
            b.defect.abs() <= 1e-10 * b.dissipated.abs().max(1.0),
            "{b:?}"
        );
    }

    #[test]
    fn indefinite_resistance_is_rejected() {
        let sys = allen_cahn();
        let bad = PhsSystem::new(MatDiffOp::zero(1, 1), sys.density().clone())
            .unwrap()
            .with_dissipation(Dissipation {
                g: MatDiffOp::identity(1),
                r: Resistance::scalar(JetPolynomial::z() - JetPolynomial::one()).unwrap(),
            })
            .unwrap();
        let grid = Grid::bounded(0.0, 2.0, 41).unwrap();
        assert!(matches!(
            discretize(&bad, &grid, 2),
            Err(NumericsError::ResistanceIndefinite { .. })
        ));
    }
}
