//! Chern connection, torsion, curvature and Chern-Ricci forms on torus
//! charts, plus numerical certification of tensor identities.

mod chern;
mod identities;
pub mod suite;

pub use chern::{
    chern_ricci, connection_torsion_curvature, trace_and_laplacian, ChernGeometry, ConnectionField,
    CurvatureField, MetricData, MetricJetField, TorsionField, TraceTarget, CONDITION_FLAG,
};
pub use identities::{
    closedness_defect, verify_bianchi_vanishing, verify_schwarz_identity, verify_trace_evolution,
    BianchiReport, SchwarzReport, TraceEvolutionInput, TraceEvolutionReport, CLOSEDNESS_TOLERANCE,
};
pub use suite::{IdentityCheck, IdentityContext, IdentityReport};

pub(crate) use chern::ricci_of_log_det;

use crate::geometry::GeometryError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TensorError {
    #[error("metric is not positive definite at node {node} (min eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { node: usize, min_eigenvalue: f64 },
    #[error("d eta = {0:e} exceeds the closedness tolerance")]
    ClosednessViolated(f64),
    #[error("invalid input data: {0}")]
    InvalidData(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}
