use std::fmt;

use crflab_core::config::ConfigError;
use crflab_core::elliptic::EllipticError;
use crflab_core::flow::FlowError;
use crflab_core::geometry::GeometryError;
use crflab_core::model::ModelError;
use crflab_core::surface::SurfaceError;
use crflab_core::tensors::TensorError;

/// Exit status classes.
#[derive(Debug)]
pub enum Failure {
    /// Bad input: exit 2.
    Validation(anyhow::Error),
    /// The computation itself failed: exit 3.
    Numerical(anyhow::Error),
}

impl Failure {
    pub fn validation(msg: impl fmt::Display) -> Self {
        Failure::Validation(anyhow::anyhow!("{msg}"))
    }

    pub fn numerical(msg: impl fmt::Display) -> Self {
        Failure::Numerical(anyhow::anyhow!("{msg}"))
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Validation(e) => write!(f, "validation error: {e:#}"),
            Failure::Numerical(e) => write!(f, "numerical failure: {e:#}"),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Validation(e.into())
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Validation(e.into())
    }
}

impl From<GeometryError> for Failure {
    fn from(e: GeometryError) -> Self {
        Failure::Validation(e.into())
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        Failure::Validation(e.into())
    }
}

impl From<SurfaceError> for Failure {
    fn from(e: SurfaceError) -> Self {
        Failure::Validation(e.into())
    }
}

impl From<TensorError> for Failure {
    fn from(e: TensorError) -> Self {
        match e {
            TensorError::ClosednessViolated(_) => Failure::Numerical(e.into()),
            _ => Failure::Validation(e.into()),
        }
    }
}

impl From<FlowError> for Failure {
    fn from(e: FlowError) -> Self {
        match e {
            FlowError::PositivityLost { .. } | FlowError::StepUnderflow { .. } | FlowError::ClosednessViolated(_) => {
                Failure::Numerical(e.into())
            }
            FlowError::Tensor(t) => t.into(),
            _ => Failure::Validation(e.into()),
        }
    }
}

impl From<EllipticError> for Failure {
    fn from(e: EllipticError) -> Self {
        match e {
            EllipticError::NonConvergence { .. } | EllipticError::PositivityLost(_) => Failure::Numerical(e.into()),
            EllipticError::Flow(f) => f.into(),
            EllipticError::Tensor(t) => t.into(),
            _ => Failure::Validation(e.into()),
        }
    }
}
