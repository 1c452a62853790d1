//! Fixed-step classical RK4 with per-step balance monitors.

use std::io::Write;

use serde::Serialize;

use super::semidiscrete::SemiDiscreteSystem;
use super::NumericsError;

/// `|λ| dt` bound inside the RK4 stability region on both axes.
pub const RK4_STABILITY_LIMIT: f64 = 2.8;

#[derive(Clone, Debug, PartialEq)]
pub struct IntegrateOptions {
    pub dt: f64,
    pub t_end: f64,
    /// Keep a state snapshot every this many steps (0: first and last only).
    pub record_every: usize,
    pub max_steps: usize,
    pub check_cfl: bool,
}

impl IntegrateOptions {
    pub fn new(dt: f64, t_end: f64) -> Self {
        IntegrateOptions {
            dt,
            t_end,
            record_every: 0,
            max_steps: 2_000_000,
            check_cfl: true,
        }
    }

    pub fn record_every(mut self, k: usize) -> Self {
        self.record_every = k;
        self
    }

    pub fn max_steps(mut self, k: usize) -> Self {
        self.max_steps = k;
        self
    }

    pub fn check_cfl(mut self, on: bool) -> Self {
        self.check_cfl = on;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Snapshot {
    pub step: usize,
    pub t: f64,
    pub state: Vec<Vec<f64>>,
}

/// Monitors are recorded at every step, states at the snapshot steps.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub dt: f64,
    pub times: Vec<f64>,
    pub hamiltonian: Vec<f64>,
    pub port_power: Vec<f64>,
    pub dissipated: Vec<f64>,
    pub defect: Vec<f64>,
    pub min_phi_f: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
    pub spectral_radius: Option<f64>,
}

impl Trajectory {
    pub fn final_state(&self) -> &[Vec<f64>] {
        &self
            .snapshots
            .last()
            .expect("at least the initial snapshot")
            .state
    }

    /// Largest single-step increase of `ℋ` (negative if it always decreased).
    pub fn max_hamiltonian_increase(&self) -> f64 {
        self.hamiltonian
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn relative_energy_drift(&self) -> f64 {
        let h0 = self.hamiltonian[0];
        let h1 = *self.hamiltonian.last().expect("nonempty");
        (h1 - h0).abs() / h0.abs().max(f64::MIN_POSITIVE)
    }

    /// One row per snapshot: `t`, the state samples, then the monitors.
    pub fn write_csv<W: Write>(&self, out: W, state_names: &[String]) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string()];
        if let Some(first) = self.snapshots.first() {
            for (i, xi) in first.state.iter().enumerate() {
                let name = state_names
                    .get(i)
                    .cloned()
                    .unwrap_or_else(|| format!("x{}", i + 1));
                header.extend((0..xi.len()).map(|k| format!("{name}[{k}]")));
            }
        }
        header.extend(["H", "port_power", "dissipated", "defect"].map(String::from));
        w.write_record(&header)?;
        for s in &self.snapshots {
            let mut row = vec![format!("{:e}", s.t)];
            row.extend(s.state.iter().flatten().map(|v| format!("{v:e}")));
            for series in [
                &self.hamiltonian,
                &self.port_power,
                &self.dissipated,
                &self.defect,
            ] {
                row.push(format!("{:e}", series[s.step]));
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn axpy(x: &[Vec<f64>], a: f64, k: &[Vec<f64>]) -> Vec<Vec<f64>> {
    x.iter()
        .zip(k)
        .map(|(xi, ki)| xi.iter().zip(ki).map(|(v, d)| v + a * d).collect())
        .collect()
}

fn norm(x: &[Vec<f64>]) -> f64 {
    x.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
}

/// Spectral radius of the linearized right-hand side at `x`, by power
/// iteration on finite-difference Jacobian-vector products.
pub fn spectral_radius(sd: &SemiDiscreteSystem, x: &[Vec<f64>], iterations: usize) -> f64 {
    let f0 = sd.rhs(x);
    let npts = sd.grid().len();
    // deterministic, non-symmetric start vector
    let mut v: Vec<Vec<f64>> = (0..x.len())
        .map(|i| {
            (0..npts)
                .map(|k| ((k * 7919 + i * 104_729) % 1000) as f64 / 1000.0 - 0.5)
                .collect()
        })
        .collect();
    let nv = norm(&v);
    v.iter_mut().flatten().for_each(|e| *e /= nv);
    let scale = norm(x).max(1.0);
    let mut log_growth = 0.0_f64;
    let mut counted = 0usize;
    for it in 0..iterations {
        let eps = 1e-7 * scale;
        let fp = sd.rhs(&axpy(x, eps, &v));
        let mut av: Vec<Vec<f64>> = fp
            .iter()
            .zip(&f0)
            .map(|(a, b)| a.iter().zip(b).map(|(p, q)| (p - q) / eps).collect())
            .collect();
        let growth = norm(&av);
        if growth == 0.0 || !growth.is_finite() {
            break;
        }
        if it >= iterations / 2 {
            log_growth += growth.ln();
            counted += 1;
        }
        av.iter_mut().flatten().for_each(|e| *e /= growth);
        v = av;
    }
    if counted == 0 {
        0.0
    } else {
        (log_growth / counted as f64).exp()
    }
}

pub fn integrate(
    sd: &SemiDiscreteSystem,
    x0: &[Vec<f64>],
    opts: &IntegrateOptions,
) -> Result<Trajectory, NumericsError> {
    sd.check_state(x0)?;
    let steps = (opts.t_end / opts.dt).round() as usize;
    if steps > opts.max_steps {
        return Err(NumericsError::StepCap {
            steps,
            cap: opts.max_steps,
        });
    }
    let spectral = if opts.check_cfl {
        let rho = spectral_radius(sd, x0, 60);
        if rho * opts.dt > RK4_STABILITY_LIMIT {
            return Err(NumericsError::CflViolation {
                dt: opts.dt,
                spectral_radius: rho,
                limit: RK4_STABILITY_LIMIT,
            });
        }
        Some(rho)
    } else {
        None
    };

    let mut traj = Trajectory {
        dt: opts.dt,
        times: Vec::with_capacity(steps + 1),
        hamiltonian: Vec::with_capacity(steps + 1),
        port_power: Vec::with_capacity(steps + 1),
        dissipated: Vec::with_capacity(steps + 1),
        defect: Vec::with_capacity(steps + 1),
        min_phi_f: Vec::with_capacity(steps + 1),
        snapshots: Vec::new(),
        spectral_radius: spectral,
    };
    let dt = opts.dt;
    let mut x = x0.to_vec();
    for step in 0..=steps {
        let t = step as f64 * dt;
        let ev = sd.evaluate(&x);
        let b = sd.balance_of(&ev);
        let h = sd.hamiltonian(&x);
        if !h.is_finite() || ev.xdot.iter().flatten().any(|v| !v.is_finite()) {
            return Err(NumericsError::NonFinite { step, t });
        }
        traj.times.push(t);
        traj.hamiltonian.push(h);
        traj.port_power.push(b.port_power);
        traj.dissipated.push(b.dissipated);
        traj.defect.push(b.defect);
        traj.min_phi_f.push(b.min_phi_f);
        let keep =
            step == 0 || step == steps || (opts.record_every > 0 && step % opts.record_every == 0);
        if keep {
            traj.snapshots.push(Snapshot {
                step,
                t,
                state: x.clone(),
            });
        }
        if step == steps {
            break;
        }
        let k1 = ev.xdot;
        let k2 = sd.rhs(&axpy(&x, 0.5 * dt, &k1));
        let k3 = sd.rhs(&axpy(&x, 0.5 * dt, &k2));
        let k4 = sd.rhs(&axpy(&x, dt, &k3));
        for (i, xi) in x.iter_mut().enumerate() {
            for (k, v) in xi.iter_mut().enumerate() {
                *v += dt / 6.0 * (k1[i][k] + 2.0 * k2[i][k] + 2.0 * k3[i][k] + k4[i][k]);
            }
        }
    }
    Ok(traj)
}
