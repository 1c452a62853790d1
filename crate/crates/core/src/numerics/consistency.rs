//! Lifted-versus-original trajectory comparison.

use serde::Serialize;

use super::integrate::Trajectory;
use super::stencil::FirstDerivative;
use super::NumericsError;
use crate::lift::LiftSpec;

/// Discrete prolongation: `x̄_k = D^{j_k} x_{i_k}`.
pub fn prolong_state(d: &FirstDerivative, x: &[Vec<f64>], spec: &LiftSpec) -> Vec<Vec<f64>> {
    spec.entries()
        .iter()
        .map(|v| {
            d.powers(&x[v.state() - 1], v.order())
                .pop()
                .expect("nonempty")
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntryError {
    pub state: usize,
    pub order: usize,
    pub sup_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub entries: Vec<EntryError>,
    pub max_error: f64,
}

fn sup_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<f64> {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            x.iter()
                .zip(y)
                .map(|(p, q)| (p - q).abs())
                .fold(0.0, f64::max)
        })
        .collect()
}

/// Sup-norm distance, over all common snapshots, between the lifted states
/// and the discrete prolongation of the original ones.
pub fn consistency_check(
    d: &FirstDerivative,
    original: &Trajectory,
    lifted: &Trajectory,
    spec: &LiftSpec,
) -> Result<ConsistencyReport, NumericsError> {
    let same_times = original.snapshots.len() == lifted.snapshots.len()
        && original
            .snapshots
            .iter()
            .zip(&lifted.snapshots)
            .all(|(a, b)| (a.t - b.t).abs() <= 1e-12 * a.t.abs().max(1.0));
    if !same_times || original.snapshots.is_empty() {
        return Err(NumericsError::MismatchedTrajectories);
    }
    let initial = sup_diff(
        &prolong_state(d, &original.snapshots[0].state, spec),
        &lifted.snapshots[0].state,
    );
    let scale = lifted.snapshots[0]
        .state
        .iter()
        .flatten()
        .fold(1.0_f64, |m, v| m.max(v.abs()));
    let worst = initial.iter().copied().fold(0.0, f64::max);
    if worst > 1e-12 * scale {
        return Err(NumericsError::InconsistentInitialData { max_error: worst });
    }
    let mut errors = vec![0.0_f64; spec.len()];
    for (a, b) in original.snapshots.iter().zip(&lifted.snapshots) {
        let diff = sup_diff(&prolong_state(d, &a.state, spec), &b.state);
        for (e, v) in errors.iter_mut().zip(diff) {
            *e = e.max(v);
        }
    }
    let entries: Vec<EntryError> = spec
        .entries()
        .iter()
        .zip(&errors)
        .map(|(v, &sup_error)| EntryError {
            state: v.state(),
            order: v.order(),
            sup_error,
        })
        .collect();
    Ok(ConsistencyReport {
        max_error: errors.iter().copied().fold(0.0, f64::max),
        entries,
    })
}

/// `log(e_i / e_{i+1}) / log(h_i / h_{i+1})` for consecutive refinements.
pub fn observed_orders(hs: &[f64], errors: &[f64]) -> Vec<f64> {
    hs.windows(2)
        .zip(errors.windows(2))
        .map(|(h, e)| (e[0] / e[1]).ln() / (h[0] / h[1]).ln())
        .collect()
}
