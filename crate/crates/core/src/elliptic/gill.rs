use crate::flow::{initial_state, run, scenario_with_volume, ConvergenceControl, RunOptions, Termination, Unnormalized};
use crate::registry::Named;

use super::problem::{EllipticProblem, EllipticSolution, SolveOptions};
use super::{EllipticError, EllipticMethod};

/// Runs `d phi / dt = log((omega + i ddbar phi)^n / omega^n) - F` to
/// stationarity. The limit of `phidot` is the constant `b`.
pub struct GillFlow;

impl Named for GillFlow {
    fn name(&self) -> &'static str {
        "gill-flow"
    }
}

impl EllipticMethod for GillFlow {
    fn solve(&self, problem: &EllipticProblem, opts: &SolveOptions) -> Result<EllipticSolution, EllipticError> {
        let sc = scenario_with_volume(problem.omega.clone(), opts.max_time, &problem.f)?.with_convergence(
            ConvergenceControl { tol: 0.5 * opts.tolerance, window: 50, enabled: true },
        );
        let eq = Unnormalized;
        let init = initial_state(&sc, &eq, None, 0.0)?;
        let out = run(
            &sc,
            &eq,
            init,
            &RunOptions { t_end: opts.max_time, max_steps: Some(opts.max_iterations), ..Default::default() },
        )?;
        if let Termination::Failed(e) = out.termination {
            return Err(e.into());
        }
        let steps = out.record.rows.len() - 1;
        let b = out.state.phidot.mean();
        let sol = EllipticSolution::finish(problem, &out.state.phi, b, self.name(), steps);
        if !(sol.residual <= opts.tolerance) {
            return Err(EllipticError::NonConvergence { method: self.name(), iterations: steps, residual: sol.residual });
        }
        Ok(sol)
    }
}
