//! Scalar reduction of the Chern-Ricci flow on torus charts:
//! `d phi / dt = log((omega_hat_t + i ddbar phi)^n / Omega)`, plus the
//! normalized variant, integrated by explicit RK4 under a diffusion CFL.

mod checkpoint;
mod engine;
mod equation;
mod record;
mod scenario;

pub use checkpoint::{read_checkpoint, write_checkpoint, Checkpoint};
pub use engine::{
    cfl_dt, initial_state, run, run_normalized, step, FlowState, NormalizedReference, RunOptions, RunOutcome, Termination,
};
pub use equation::{equations, FlowEquation, Normalized, Unnormalized};
pub use record::{MonitorRow, TrajectoryRecord, CSV_COLUMNS};
pub use scenario::{scenario_from_metric, scenario_with_volume, ConvergenceControl, FlowMode, FlowScenario, StepControl};

use crate::geometry::GeometryError;
use crate::tensors::TensorError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FlowError {
    #[error("reference metric is not positive definite on [0, T0] (min eigenvalue {0:e})")]
    PositivityUnreachable(f64),
    #[error("positivity lost at t = {t} (min eigenvalue {min_eigenvalue:e})")]
    PositivityLost { t: f64, min_eigenvalue: f64 },
    #[error("time step underflow at t = {t} (dt = {dt:e})")]
    StepUnderflow { t: f64, dt: f64 },
    #[error("-Ric(Omega) is not positive definite (min eigenvalue {0:e}); supply an acknowledged reference")]
    DegenerateReference(f64),
    #[error("chi is not closed (defect {0:e})")]
    ClosednessViolated(f64),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}
