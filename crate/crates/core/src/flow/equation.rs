use crate::geometry::MetricField;
use crate::registry::{Named, Registry};

use super::scenario::{FlowMode, FlowScenario};

/// One parabolic potential equation `phidot = rhs(t, omega, phi)` with
/// `omega = reference(t) + i ddbar phi`.
pub trait FlowEquation: Named + Send + Sync {
    fn mode(&self) -> FlowMode;
    fn reference(&self, sc: &FlowScenario, t: f64) -> MetricField;
    /// `phidot` from the per-node determinant of `omega` and `phi`.
    fn rhs(&self, sc: &FlowScenario, det: &[f64], phi: &[f64]) -> Vec<f64>;
    /// Zeroth-order decay rate added to the stiffness estimate.
    fn shift(&self) -> f64;
}

/// `phidot = log(omega^n / Omega)`, `omega_hat_t = omega0 + t chi`.
pub struct Unnormalized;

/// `phidot = log(omega^n / Omega) - phi`,
/// `omega_hat_t = -rho + e^{-t}(rho + omega0)` with `rho = Ric(Omega)`.
pub struct Normalized;

impl Named for Unnormalized {
    fn name(&self) -> &'static str {
        "unnormalized"
    }
}

impl Named for Normalized {
    fn name(&self) -> &'static str {
        "normalized"
    }
}

fn log_ratio<'a>(sc: &'a FlowScenario, det: &'a [f64]) -> impl Iterator<Item = f64> + 'a {
    det.iter().zip(&sc.log_omega).map(|(d, lo)| d.ln() - lo)
}

impl FlowEquation for Unnormalized {
    fn mode(&self) -> FlowMode {
        FlowMode::Unnormalized
    }

    fn reference(&self, sc: &FlowScenario, t: f64) -> MetricField {
        sc.reference(t)
    }

    fn rhs(&self, sc: &FlowScenario, det: &[f64], _phi: &[f64]) -> Vec<f64> {
        log_ratio(sc, det).collect()
    }

    fn shift(&self) -> f64 {
        0.0
    }
}

impl FlowEquation for Normalized {
    fn mode(&self) -> FlowMode {
        FlowMode::Normalized
    }

    fn reference(&self, sc: &FlowScenario, t: f64) -> MetricField {
        let e = (-t).exp();
        sc.g0.combine(&sc.rho, e, e - 1.0).expect("same chart")
    }

    fn rhs(&self, sc: &FlowScenario, det: &[f64], phi: &[f64]) -> Vec<f64> {
        log_ratio(sc, det).zip(phi).map(|(l, p)| l - p).collect()
    }

    fn shift(&self) -> f64 {
        1.0
    }
}

pub fn equations() -> Registry<dyn FlowEquation> {
    let mut reg: Registry<dyn FlowEquation> = Registry::new("flow equation");
    reg.register(Box::new(Unnormalized)).register(Box::new(Normalized));
    reg
}
