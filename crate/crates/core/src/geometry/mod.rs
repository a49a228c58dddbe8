//! Torus charts, discrete fields and spectral differentiation.

mod chart;
mod field;
pub mod linalg;
pub mod snapshot;
pub mod spectral;

pub use chart::{ChartRef, TorusChart, MAX_COMPLEX_DIM};
pub use field::{
    i_ddbar, min_eigenvalue, spectral_derivative, FieldRef, FieldValue, FormField,
    HermitianMatrixField, MetricField, ScalarField, VolumeField, HERMITIAN_TOLERANCE,
};

pub(crate) use field::ensure_same;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("invalid chart: {0}")]
    InvalidChart(String),
    #[error("fields live on different charts")]
    ChartMismatch,
    #[error("expected {expected} values, found {found}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("non-finite value {0}")]
    NonFinite(f64),
    #[error("matrix field is not Hermitian (correction {0:e})")]
    NotHermitian(f64),
    #[error("volume density must be positive (min {0:e})")]
    NonPositiveVolume(f64),
    #[error("axis {0} is not active on this chart")]
    InactiveAxis(usize),
    #[error("derivative order {0} not supported (use 1 or 2)")]
    InvalidOrder(u32),
    #[error("snapshot: {0}")]
    Snapshot(String),
}
