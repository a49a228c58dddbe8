//! Elliptic complex Monge-Ampère equation on torus charts:
//! `(omega + i ddbar phi)^n = e^{F + b} omega^n`.

mod estimates;
mod gill;
mod krylov;
mod newton;
mod problem;

pub use estimates::{certify_estimates, refinement_stable_a, EstimateReport};
pub use gill::GillFlow;
pub use krylov::{bicgstab, KrylovReport};
pub use newton::{NewtonContinuation, NewtonOptions};
pub use problem::{
    manufactured_problem, EllipticProblem, EllipticSolution, Normalization, SolveOptions,
};

use crate::flow::FlowError;
use crate::geometry::GeometryError;
use crate::registry::{Named, Registry};
use crate::tensors::TensorError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EllipticError {
    #[error("{method} did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { method: &'static str, iterations: usize, residual: f64 },
    #[error("positivity lost: line search exhausted (min eigenvalue {0:e})")]
    PositivityLost(f64),
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// A solver for [`EllipticProblem`].
pub trait EllipticMethod: Named + Send + Sync {
    fn solve(&self, problem: &EllipticProblem, opts: &SolveOptions) -> Result<EllipticSolution, EllipticError>;
}

pub fn methods() -> Registry<dyn EllipticMethod> {
    let mut reg: Registry<dyn EllipticMethod> = Registry::new("elliptic method");
    reg.register(Box::new(GillFlow)).register(Box::new(NewtonContinuation));
    reg
}

/// Solves with the named method (`gill-flow` or `newton-continuation`).
pub fn solve_elliptic(
    problem: &EllipticProblem,
    method: &str,
    opts: &SolveOptions,
) -> Result<EllipticSolution, EllipticError> {
    let reg = methods();
    let m = reg.get(method).map_err(|e| EllipticError::InvalidProblem(e.to_string()))?;
    m.solve(problem, opts)
}
