use crate::geometry::i_ddbar;
use crate::tensors::MetricData;

use super::problem::{EllipticProblem, EllipticSolution};
use super::EllipticError;

/// Empirical constants of the second-order estimate
/// `tr_omega omega' <= C e^{A (phi - inf phi)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    /// `sup phi - inf phi`
    pub oscillation: f64,
    /// `sup tr_omega omega'`
    pub max_trace: f64,
    /// `(A, C(A))` with `C(A) = sup tr_omega omega' e^{-A (phi - inf phi)}`.
    pub constants: Vec<(f64, f64)>,
}

pub fn certify_estimates(
    problem: &EllipticProblem,
    solution: &EllipticSolution,
    a_grid: &[f64],
) -> Result<EstimateReport, EllipticError> {
    let data = MetricData::new(&problem.omega)?;
    let dd = i_ddbar(&solution.phi);
    let extra = data.trace_of(&dd.components());
    let n = problem.omega.dim() as f64;
    let trace: Vec<f64> = extra.iter().map(|v| n + v).collect();
    let inf = solution.phi.min();
    let constants = a_grid
        .iter()
        .map(|&a| {
            let c = trace
                .iter()
                .zip(solution.phi.values())
                .map(|(tr, p)| tr * (-a * (p - inf)).exp())
                .fold(f64::NEG_INFINITY, f64::max);
            (a, c)
        })
        .collect();
    Ok(EstimateReport {
        oscillation: solution.phi.max() - solution.phi.min(),
        max_trace: trace.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        constants,
    })
}

/// Smallest `A` whose `C(A)` changes by at most `rel` between a coarse and
/// a refined report over the same `A` grid.
pub fn refinement_stable_a(coarse: &EstimateReport, fine: &EstimateReport, rel: f64) -> Option<f64> {
    coarse
        .constants
        .iter()
        .zip(&fine.constants)
        .filter(|((a0, c0), (a1, c1))| a0 == a1 && (c1 - c0).abs() <= rel * c0.abs())
        .map(|((a, _), _)| *a)
        .fold(None, |m: Option<f64>, a| Some(m.map_or(a, |m| m.min(a))))
}
