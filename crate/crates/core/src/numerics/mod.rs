//! Method-of-lines discretization, time integration and balance checks.

mod compiled;
mod consistency;
mod integrate;
mod semidiscrete;
mod stencil;

use thiserror::Error;

use crate::grid::{BoundaryKind, GridError};
use crate::ports::PortError;

pub use compiled::{CompiledPoly, JetSamples};
pub use consistency::{
    consistency_check, observed_orders, prolong_state, ConsistencyReport, EntryError,
};
pub use integrate::{
    integrate, spectral_radius, IntegrateOptions, Snapshot, Trajectory, RK4_STABILITY_LIMIT,
};
pub use semidiscrete::{discretize, Balance, Closure, Evaluation, SemiDiscreteSystem};
pub use stencil::{DiscreteOp, FirstDerivative};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Port(#[from] PortError),
    #[error("no first-derivative stencil of order {order} for {bc:?} grids")]
    UnsupportedStencil { bc: BoundaryKind, order: usize },
    #[error("zero-trace closure requires a bounded grid")]
    ZeroTraceNeedsBoundedGrid,
    #[error("resistive map is not positive semidefinite at z = {z} (smallest eigenvalue {min_eigenvalue:e})")]
    ResistanceIndefinite { z: f64, min_eigenvalue: f64 },
    #[error("state must have {states} components of {points} samples")]
    StateShape { states: usize, points: usize },
    #[error("dt = {dt} exceeds the RK4 limit {limit} / {spectral_radius:.4e} (estimated spectral radius)")]
    CflViolation {
        dt: f64,
        spectral_radius: f64,
        limit: f64,
    },
    #[error("non-finite value at step {step} (t = {t})")]
    NonFinite { step: usize, t: f64 },
    #[error("{steps} steps requested, cap is {cap}")]
    StepCap { steps: usize, cap: usize },
    #[error("trajectories do not share snapshot times")]
    MismatchedTrajectories,
    #[error("lifted initial data is not the prolongation of the original (error {max_error:e})")]
    InconsistentInitialData { max_error: f64 },
}
