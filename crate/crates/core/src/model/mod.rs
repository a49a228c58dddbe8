//! Model geometries: closed-form Hopf manifolds and torus metric recipes.

pub mod hopf;
pub mod jet;
pub mod quadrature;
mod recipe;

pub use hopf::{
    hopf_metric_and_ricci, verify_hopf_flow, verify_hopf_trace_chain, HopfChainReport, HopfExplicitSolution,
    HopfFlowReport, HopfSampleSet, HopfValues,
};
pub use jet::{Monomial, PointJet, TestPotential};
pub use quadrature::{integrate_hopf, GaussLegendre, HopfIntegrand, HopfQuadrature};
pub use recipe::{matrix_from_pairs, random_potential, Perturbation, RandomRecipeOptions, TorusMetricRecipe};

use crate::geometry::GeometryError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("invalid recipe: {0}")]
    InvalidRecipe(String),
    #[error("metric is not positive definite (min eigenvalue {0:e})")]
    NotPositiveDefinite(f64),
    #[error("outside the domain: {0}")]
    Domain(String),
    #[error("unsupported integrand `{0}`")]
    UnsupportedIntegrand(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}
