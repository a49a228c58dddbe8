use std::path::PathBuf;

use crate::geometry::{i_ddbar, MetricField, ScalarField};

use super::checkpoint::{write_checkpoint, Checkpoint};
use super::equation::{FlowEquation, Normalized};
use super::record::{MonitorRow, TrajectoryRecord};
use super::scenario::{min_eig_neg_rho, FlowMode, FlowScenario};
use super::FlowError;

/// Real-axis stability limit of classical RK4.
const RK4_REAL_LIMIT: f64 = 2.785;
const MIN_DT: f64 = 1e-12;
const MAX_HALVINGS: usize = 40;

#[derive(Debug, Clone)]
pub struct FlowState {
    pub t: f64,
    pub phi: ScalarField,
    /// `rhs(t, omega, phi)`, cached.
    pub phidot: ScalarField,
    /// `reference(t) + i ddbar phi`, cached.
    pub omega: MetricField,
    pub det: Vec<f64>,
    pub min_eig: f64,
    pub max_eig: f64,
}

fn evaluate(sc: &FlowScenario, eq: &dyn FlowEquation, t: f64, phi: ScalarField) -> Result<FlowState, FlowError> {
    let omega = eq.reference(sc, t).add(&i_ddbar(&phi))?;
    let (lo, hi) = omega.eigen_bounds();
    let min_eig = lo.iter().copied().fold(f64::INFINITY, f64::min);
    let max_eig = hi.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(min_eig >= sc.step.eps_pd) {
        return Err(FlowError::PositivityLost { t, min_eigenvalue: min_eig });
    }
    let det = omega.determinant();
    let phidot = ScalarField::new(phi.chart().clone(), eq.rhs(sc, &det, phi.values()))?;
    Ok(FlowState { t, phi, phidot, omega, det, min_eig, max_eig })
}

/// State at time `t` with potential `phi` (zero if `None`).
pub fn initial_state(
    sc: &FlowScenario,
    eq: &dyn FlowEquation,
    phi: Option<ScalarField>,
    t: f64,
) -> Result<FlowState, FlowError> {
    let phi = phi.unwrap_or_else(|| ScalarField::zeros(sc.g0.chart().clone()));
    crate::geometry::ensure_same(sc.g0.chart(), phi.chart())?;
    evaluate(sc, eq, t, phi)
}

fn axpy(base: &ScalarField, a: f64, dir: &[f64]) -> ScalarField {
    let v = base.values().iter().zip(dir).map(|(b, d)| b + a * d).collect();
    ScalarField::new(base.chart().clone(), v).expect("finite update")
}

/// Largest step allowed by the diffusion CFL condition at `state`.
pub fn cfl_dt(sc: &FlowScenario, eq: &dyn FlowEquation, state: &FlowState) -> f64 {
    let symbol = sc.g0.chart().max_wirtinger_symbol() / state.min_eig;
    sc.step.safety * RK4_REAL_LIMIT / (symbol + eq.shift())
}

/// One classical RK4 step of size `dt`.
pub fn step(state: &FlowState, sc: &FlowScenario, eq: &dyn FlowEquation, dt: f64) -> Result<FlowState, FlowError> {
    if !(dt >= MIN_DT) {
        return Err(FlowError::StepUnderflow { t: state.t, dt });
    }
    let t = state.t;
    let k1 = state.phidot.values();
    let s2 = evaluate(sc, eq, t + 0.5 * dt, axpy(&state.phi, 0.5 * dt, k1))?;
    let k2 = s2.phidot.values();
    let s3 = evaluate(sc, eq, t + 0.5 * dt, axpy(&state.phi, 0.5 * dt, k2))?;
    let k3 = s3.phidot.values();
    let s4 = evaluate(sc, eq, t + dt, axpy(&state.phi, dt, k3))?;
    let k4 = s4.phidot.values();
    let incr: Vec<f64> = (0..k1.len()).map(|i| (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0).collect();
    evaluate(sc, eq, t + dt, axpy(&state.phi, dt, &incr))
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub t_end: f64,
    /// Record `sup det(g0) / det(g)` each step.
    pub schwarz: bool,
    /// Write a checkpoint every this many accepted steps.
    pub checkpoint_every: Option<usize>,
    pub checkpoint_path: Option<PathBuf>,
    pub max_steps: Option<usize>,
    /// Times the integrator lands on exactly; the states are returned.
    pub sample_times: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Termination {
    ReachedEnd,
    Converged,
    /// Stopped by a step error; the outcome holds the last good state.
    Failed(FlowError),
    StepBudget,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub record: TrajectoryRecord,
    pub state: FlowState,
    pub termination: Termination,
    pub samples: Vec<FlowState>,
    pub notes: Vec<String>,
}

fn monitors(sc: &FlowScenario, eq: &dyn FlowEquation, s: &FlowState, dt: f64, update: f64, schwarz: bool) -> MonitorRow {
    let chart = s.phi.chart();
    let n = sc.dim() as f64;
    let t = s.t;
    let phi = s.phi.values();
    let pd = s.phidot.values();
    let mean_pd = s.phidot.mean();
    let mean_det = s.det.iter().sum::<f64>() / s.det.len() as f64;
    let unnormalized = eq.mode() == FlowMode::Unnormalized;
    let fold_max = |it: &mut dyn Iterator<Item = f64>| it.fold(f64::NEG_INFINITY, f64::max);
    let fold_min = |it: &mut dyn Iterator<Item = f64>| it.fold(f64::INFINITY, f64::min);
    MonitorRow {
        t,
        dt,
        volume: mean_det * chart.cell_volume(),
        min_eig: s.min_eig,
        max_eig: s.max_eig,
        sup_phi: s.phi.max(),
        inf_phi: s.phi.min(),
        sup_phidot: s.phidot.max(),
        inf_phidot: s.phidot.min(),
        max_q1: unnormalized.then(|| fold_max(&mut phi.iter().zip(pd).map(|(p, d)| t * d - p - n * t))),
        min_q0: unnormalized.then(|| fold_min(&mut phi.iter().zip(pd).map(|(p, d)| (sc.t0 - t) * d + p + n * t))),
        max_psi: unnormalized.then(|| fold_max(&mut phi.iter().map(|p| p - sc.a_const * t))),
        osc_phidot: fold_max(&mut pd.iter().map(|d| (d - mean_pd).abs())),
        update,
        schwarz_sup_u: schwarz.then(|| {
            let d0 = sc.g0.determinant();
            fold_max(&mut d0.iter().zip(&s.det).map(|(a, b)| a / b))
        }),
    }
}

/// `sup |delta phi - mean delta phi| / dt`
fn mean_free_update(old: &ScalarField, new: &ScalarField, dt: f64) -> f64 {
    let d: Vec<f64> = new.values().iter().zip(old.values()).map(|(a, b)| a - b).collect();
    let m = d.iter().sum::<f64>() / d.len() as f64;
    d.iter().fold(0.0f64, |acc, v| acc.max((v - m).abs())) / dt
}

/// Integrates from `initial` until `opts.t_end`, stationarity, or a step
/// failure.
pub fn run(
    sc: &FlowScenario,
    eq: &dyn FlowEquation,
    initial: FlowState,
    opts: &RunOptions,
) -> Result<RunOutcome, FlowError> {
    if eq.mode() == FlowMode::Unnormalized && opts.t_end > sc.t0 * (1.0 + 1e-12) {
        return Err(FlowError::InvalidScenario(format!("t_end = {} exceeds T0 = {}", opts.t_end, sc.t0)));
    }
    if !(opts.t_end >= initial.t) {
        return Err(FlowError::InvalidScenario(format!("t_end = {} precedes t = {}", opts.t_end, initial.t)));
    }
    let mut samples_left: Vec<f64> = opts.sample_times.iter().copied().filter(|&s| s >= initial.t).collect();
    samples_left.sort_by(|a, b| a.total_cmp(b));
    let mut samples = Vec::new();
    while samples_left.first().is_some_and(|&s| s <= initial.t) {
        samples.push(initial.clone());
        samples_left.remove(0);
    }

    let mut record = TrajectoryRecord::default();
    record.push(monitors(sc, eq, &initial, 0.0, f64::NAN, opts.schwarz));
    let mut state = initial;
    let mut steps = 0usize;
    let mut quiet = 0usize;
    let mut first = true;
    let termination = loop {
        let remaining = opts.t_end - state.t;
        if remaining <= 1e-14 * opts.t_end.abs().max(1.0) {
            break Termination::ReachedEnd;
        }
        if opts.max_steps.is_some_and(|m| steps >= m) {
            break Termination::StepBudget;
        }
        let mut dt = cfl_dt(sc, eq, &state).min(sc.step.max_dt).min(remaining);
        if first {
            dt = dt.min(sc.step.initial_dt);
        }
        let mut land_on_sample = false;
        if let Some(&s) = samples_left.first() {
            if s - state.t <= dt * (1.0 + 1e-12) {
                dt = s - state.t;
                land_on_sample = true;
            }
        }
        let mut attempt = 0;
        let next = loop {
            match step(&state, sc, eq, dt) {
                Ok(next) => break Ok(next),
                Err(e @ FlowError::StepUnderflow { .. }) => break Err(e),
                Err(e) if attempt >= MAX_HALVINGS => break Err(e),
                Err(_) => {
                    dt *= 0.5;
                    land_on_sample = false;
                    attempt += 1;
                }
            }
        };
        let next = match next {
            Ok(next) => next,
            Err(e) => break Termination::Failed(e),
        };
        let mut next = next;
        if land_on_sample {
            // Pin the clock to the sample time exactly.
            next.t = samples_left.remove(0);
            samples.push(next.clone());
        }
        let update = mean_free_update(&state.phi, &next.phi, dt);
        record.push(monitors(sc, eq, &next, dt, update, opts.schwarz));
        state = next;
        steps += 1;
        first = false;
        if let (Some(every), Some(path)) = (opts.checkpoint_every, &opts.checkpoint_path) {
            if every > 0 && steps % every == 0 {
                write_checkpoint(path, &Checkpoint { t: state.t, dt, phi: state.phi.clone() })?;
            }
        }
        if sc.convergence.enabled {
            quiet = if update < sc.convergence.tol { quiet + 1 } else { 0 };
            if quiet >= sc.convergence.window && samples_left.is_empty() {
                break Termination::Converged;
            }
        }
    };
    Ok(RunOutcome { record, state, termination, samples, notes: Vec::new() })
}

/// How the normalized reference `-rho + e^{-t}(rho + omega0)` is justified.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalizedReference {
    /// Require `-Ric(Omega) > 0`, the setting where the normalized flow has
    /// a Kähler-Einstein target.
    Volume,
    /// Run the equation as written even when `-Ric(Omega)` is not positive
    /// (on a torus `Ric(Omega) = 0` and the reference decays to zero).
    Acknowledged,
}

/// Normalized flow `d omega / dt = -Ric(omega) - omega`, from `phi = 0` at
/// `t = 0` or from a checkpoint.
pub fn run_normalized(
    sc: &FlowScenario,
    reference: NormalizedReference,
    resume: Option<Checkpoint>,
    opts: &RunOptions,
) -> Result<RunOutcome, FlowError> {
    let m = min_eig_neg_rho(sc);
    let mut notes = Vec::new();
    if !(m > 0.0) {
        match reference {
            NormalizedReference::Volume => return Err(FlowError::DegenerateReference(m)),
            NormalizedReference::Acknowledged => notes.push(format!(
                "-Ric(Omega) is not positive definite (min eigenvalue {m:.3e}); no Kähler-Einstein limit exists on this chart"
            )),
        }
    }
    let eq = Normalized;
    let init = match resume {
        Some(ck) => initial_state(sc, &eq, Some(ck.phi), ck.t)?,
        None => initial_state(sc, &eq, None, 0.0)?,
    };
    let mut out = run(sc, &eq, init, opts)?;
    out.notes.extend(notes);
    Ok(out)
}
