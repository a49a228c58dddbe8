//! Numerical laboratory for the Chern-Ricci flow `d omega / dt = -Ric(omega)`
//! on Hermitian manifolds.
//!
//! The torus side is pseudo-spectral: fields live on periodic grids and
//! every derivative is exact for the trigonometric interpolant. The Hopf side
//! is pointwise and closed-form. Cohomological maximal-time computations for
//! complex surfaces need no grid at all.

pub mod config;
pub mod elliptic;
pub mod flow;
pub mod geometry;
pub mod model;
pub mod registry;
pub mod surface;
pub mod tensors;
