//! Maximal existence time and collapse type of the flow on compact complex
//! surfaces, from intersection data.
//!
//! Curvature forms carry their `2 pi`: `Ric` represents `2 pi c1`, so a curve
//! `D` has `int_D omega(t) = int_D omega0 + 2 pi t D.K`, and
//! `int Ric^2 = 4 pi^2 c1^2`.

mod classify;
mod data;
mod maxtime;

pub use classify::{classify, ClassificationReport};
pub use data::{hopf_surface_data, Divisor, Kodaira, SurfaceClassData, SurfaceFile, SurfaceFlags};
pub use maxtime::{divisor_volume, maximal_time, smallest_positive_root, volume_polynomial, Binding, CollapseCase, MaxTimeResult};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SurfaceError {
    #[error("inconsistent data: {0}")]
    InconsistentData(String),
    #[error("flag contradiction: {0}")]
    FlagContradiction(String),
    #[error("parse error: {0}")]
    Parse(String),
}
