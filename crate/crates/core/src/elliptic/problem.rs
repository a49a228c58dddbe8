use serde::{Deserialize, Serialize};

use crate::geometry::{i_ddbar, min_eigenvalue, MetricField, ScalarField};

use super::EllipticError;

/// How the additive constant of `phi` is fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    #[default]
    MeanZero,
    SupZero,
}

impl Normalization {
    pub fn apply(self, phi: &ScalarField) -> ScalarField {
        let c = match self {
            Normalization::MeanZero => phi.mean(),
            Normalization::SupZero => phi.max(),
        };
        phi.map(|v| v - c)
    }
}

/// `(omega + i ddbar phi)^n = e^{F + b} omega^n` for unknown `(phi, b)`.
#[derive(Debug, Clone)]
pub struct EllipticProblem {
    pub omega: MetricField,
    pub f: ScalarField,
    pub normalization: Normalization,
}

impl EllipticProblem {
    pub fn new(omega: MetricField, f: ScalarField, normalization: Normalization) -> Result<Self, EllipticError> {
        crate::geometry::ensure_same(omega.chart(), f.chart())?;
        let m = min_eigenvalue(&omega);
        if !(m > 0.0) {
            return Err(EllipticError::InvalidProblem(format!("omega is not positive definite (min eigenvalue {m:e})")));
        }
        Ok(EllipticProblem { omega, f, normalization })
    }

    /// `log((omega + i ddbar phi)^n / omega^n) - F`, or `None` if the metric
    /// is not positive definite somewhere.
    pub fn log_ratio_minus_f(&self, phi: &ScalarField) -> Option<(MetricField, Vec<f64>)> {
        let w = self.omega.add(&i_ddbar(phi)).ok()?;
        if !(min_eigenvalue(&w) > 0.0) {
            return None;
        }
        let d0 = self.omega.determinant();
        let r = w
            .determinant()
            .iter()
            .zip(&d0)
            .zip(self.f.values())
            .map(|((d, d0), f)| (d / d0).ln() - f)
            .collect();
        Some((w, r))
    }

    /// `sup |log((omega + i ddbar phi)^n / omega^n) - F - b|`.
    pub fn residual(&self, phi: &ScalarField, b: f64) -> f64 {
        match self.log_ratio_minus_f(phi) {
            Some((_, r)) => r.iter().fold(0.0f64, |a, v| a.max((v - b).abs())),
            None => f64::INFINITY,
        }
    }

    /// Constant that the Kähler identity predicts:
    /// `e^b = int omega^n / int e^F omega^n`.
    pub fn kahler_b(&self) -> f64 {
        let d0 = self.omega.determinant();
        let vol: f64 = d0.iter().sum();
        let weighted: f64 = d0.iter().zip(self.f.values()).map(|(d, f)| d * f.exp()).sum();
        (vol / weighted).ln()
    }
}

#[derive(Debug, Clone)]
pub struct EllipticSolution {
    pub phi: ScalarField,
    pub b: f64,
    pub residual: f64,
    /// `sup phi - inf phi`
    pub oscillation: f64,
    pub method: &'static str,
    /// Newton iterations or accepted flow steps.
    pub iterations: usize,
}

impl EllipticSolution {
    pub(crate) fn finish(
        problem: &EllipticProblem,
        phi: &ScalarField,
        b: f64,
        method: &'static str,
        iterations: usize,
    ) -> Self {
        let phi = problem.normalization.apply(phi);
        let residual = problem.residual(&phi, b);
        EllipticSolution { oscillation: phi.max() - phi.min(), phi, b, residual, method, iterations }
    }
}

/// Shared solver knobs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveOptions {
    /// Target for `sup |log ratio - F - b|`.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Flow horizon cap for `gill-flow`.
    pub max_time: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tolerance: 1e-10, max_iterations: 200_000, max_time: 200.0 }
    }
}

/// Problem whose exact solution is `phi_star`: `F = log((omega + i ddbar
/// phi_star)^n / omega^n)`, so `b = 0`.
pub fn manufactured_problem(
    omega: MetricField,
    phi_star: &ScalarField,
    normalization: Normalization,
) -> Result<EllipticProblem, EllipticError> {
    let zero = ScalarField::zeros(omega.chart().clone());
    let base = EllipticProblem::new(omega, zero, normalization)?;
    let (_, f) = base
        .log_ratio_minus_f(phi_star)
        .ok_or_else(|| EllipticError::InvalidProblem("omega + i ddbar phi* is not positive definite".into()))?;
    let f = ScalarField::new(base.omega.chart().clone(), f)?;
    EllipticProblem::new(base.omega, f, normalization)
}
