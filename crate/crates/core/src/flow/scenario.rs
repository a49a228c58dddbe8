use serde::{Deserialize, Serialize};

use crate::geometry::{i_ddbar, min_eigenvalue, spectral, FormField, MetricField, ScalarField, VolumeField};
use crate::tensors::{chern_ricci, closedness_defect, ricci_of_log_det, CLOSEDNESS_TOLERANCE};

use super::FlowError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlowMode {
    Unnormalized,
    Normalized,
}

impl FlowMode {
    pub fn name(self) -> &'static str {
        match self {
            FlowMode::Unnormalized => "unnormalized",
            FlowMode::Normalized => "normalized",
        }
    }
}

/// Time-step control.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StepControl {
    /// Cap on the first step.
    pub initial_dt: f64,
    /// Fraction of the RK4 stability limit actually used.
    pub safety: f64,
    /// Smallest admissible metric eigenvalue.
    pub eps_pd: f64,
    /// Cap on every step.
    pub max_dt: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl { initial_dt: 1e-3, safety: 0.8, eps_pd: 1e-8, max_dt: 0.05 }
    }
}

/// Stationarity test: `osc(phidot) < tol` on `window` consecutive steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergenceControl {
    pub tol: f64,
    pub window: usize,
    /// Disable to always integrate up to `t_end`.
    pub enabled: bool,
}

impl Default for ConvergenceControl {
    fn default() -> Self {
        ConvergenceControl { tol: 1e-6, window: 50, enabled: true }
    }
}

/// Data of one flow run: `omega_hat_t = omega0 + t chi` with
/// `chi = i ddbar f / T0 - Ric(omega0)` and `Omega = omega0^n e^{f / T0}`.
#[derive(Debug, Clone)]
pub struct FlowScenario {
    pub g0: MetricField,
    pub t0: f64,
    pub f: ScalarField,
    pub chi: FormField,
    pub omega: VolumeField,
    pub mode: FlowMode,
    pub step: StepControl,
    pub convergence: ConvergenceControl,
    /// `Ric(Omega) = -i ddbar log Omega`.
    pub rho: FormField,
    /// Constant `A` of the monitored `psi = phi - A t`.
    pub a_const: f64,
    pub(crate) log_omega: Vec<f64>,
}

impl FlowScenario {
    pub fn with_mode(mut self, mode: FlowMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_step(mut self, step: StepControl) -> Self {
        self.step = step;
        self
    }

    pub fn with_convergence(mut self, c: ConvergenceControl) -> Self {
        self.convergence = c;
        self
    }

    pub fn dim(&self) -> usize {
        self.g0.dim()
    }

    /// `omega0 + t chi`.
    pub fn reference(&self, t: f64) -> MetricField {
        self.g0.combine(&self.chi, 1.0, t).expect("same chart")
    }
}

/// Builds the scenario, deriving `f` from `i ddbar f = T0 Ric(omega0)` when
/// none is supplied (the torus has vanishing first Bott-Chern class, so the
/// equation is solvable).
pub fn scenario_from_metric(g0: MetricField, t0: f64, f: Option<ScalarField>) -> Result<FlowScenario, FlowError> {
    if !(t0 > 0.0 && t0.is_finite()) {
        return Err(FlowError::InvalidScenario(format!("T0 = {t0} must be positive and finite")));
    }
    let chart = g0.chart().clone();
    let ric0 = chern_ricci(&g0)?;
    let f = match f {
        Some(f) => {
            crate::geometry::ensure_same(&chart, f.chart())?;
            f
        }
        None => {
            let n = g0.dim();
            let comps = ric0.components();
            let rhs: Vec<f64> = (0..chart.node_count())
                .map(|node| t0 * (0..n).map(|k| comps[k * n + k][node].re).sum::<f64>())
                .collect();
            let f = ScalarField::new(chart.clone(), spectral::inverse_flat_laplacian(&chart, &rhs))?;
            let defect = i_ddbar(&f).combine(&ric0, 1.0, -t0)?.sup_norm();
            if defect > 1e-8 * (1.0 + t0 * ric0.sup_norm()) {
                return Err(FlowError::InvalidScenario(format!(
                    "Ric(omega0) is not i ddbar-exact on this chart (defect {defect:e})"
                )));
            }
            f
        }
    };
    let chi = i_ddbar(&f).combine(&ric0, 1.0 / t0, -1.0)?;
    let closed = closedness_defect(&chi);
    if closed > CLOSEDNESS_TOLERANCE {
        return Err(FlowError::ClosednessViolated(closed));
    }
    let det0 = g0.determinant();
    let log_omega: Vec<f64> = det0.iter().zip(f.values()).map(|(d, fv)| d.ln() + fv / t0).collect();
    let omega = VolumeField::new(chart.clone(), log_omega.iter().map(|v| v.exp()).collect())?;

    let end = g0.combine(&chi, 1.0, t0)?;
    let min_end = min_eigenvalue(&end).min(min_eigenvalue(&g0));
    if !(min_end > 0.0) {
        return Err(FlowError::PositivityUnreachable(min_end));
    }
    let rho = ricci_of_log_det(&chart, &log_omega);

    let mut a = f64::NEG_INFINITY;
    for k in 0..=10 {
        let t = t0 * k as f64 / 10.0;
        let det = g0.combine(&chi, 1.0, t)?.determinant();
        for (d, lo) in det.iter().zip(&log_omega) {
            a = a.max(d.ln() - lo);
        }
    }
    Ok(FlowScenario {
        g0,
        t0,
        f,
        chi,
        omega,
        mode: FlowMode::Unnormalized,
        step: StepControl::default(),
        convergence: ConvergenceControl::default(),
        rho,
        a_const: a + 0.1,
        log_omega,
    })
}

/// Smallest eigenvalue of `-rho`, used to decide whether the normalized
/// reference is admissible.
pub(crate) fn min_eig_neg_rho(sc: &FlowScenario) -> f64 {
    let neg: FormField = sc.rho.scale(-1.0);
    min_eigenvalue(&neg)
}

/// Scenario with the fixed reference `omega_hat_t = omega0` (`chi = 0`) and a
/// prescribed volume form `Omega = omega0^n e^F`. This is the potential
/// equation used to reach Chern-Ricci-flat or prescribed-volume metrics.
pub fn scenario_with_volume(g0: MetricField, t0: f64, f_ratio: &ScalarField) -> Result<FlowScenario, FlowError> {
    if !(t0 > 0.0 && t0.is_finite()) {
        return Err(FlowError::InvalidScenario(format!("T0 = {t0} must be positive and finite")));
    }
    let chart = g0.chart().clone();
    crate::geometry::ensure_same(&chart, f_ratio.chart())?;
    let min0 = min_eigenvalue(&g0);
    if !(min0 > 0.0) {
        return Err(FlowError::PositivityUnreachable(min0));
    }
    let det0 = g0.determinant();
    let log_omega: Vec<f64> = det0.iter().zip(f_ratio.values()).map(|(d, fv)| d.ln() + fv).collect();
    let omega = VolumeField::new(chart.clone(), log_omega.iter().map(|v| v.exp()).collect())?;
    let rho = ricci_of_log_det(&chart, &log_omega);
    let a = det0
        .iter()
        .zip(&log_omega)
        .map(|(d, lo)| d.ln() - lo)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(FlowScenario {
        f: f_ratio.map(|v| v * t0),
        chi: FormField::zeros(chart),
        g0,
        t0,
        omega,
        mode: FlowMode::Unnormalized,
        step: StepControl::default(),
        convergence: ConvergenceControl::default(),
        rho,
        a_const: a + 0.1,
        log_omega,
    })
}
