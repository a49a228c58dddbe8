use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crflab_core::config::{ChartSpec, ReferenceSpec, Scenario};
use crflab_core::elliptic::{
    certify_estimates, manufactured_problem, methods, EllipticProblem, Normalization, SolveOptions,
};
use crflab_core::flow::{
    equations, initial_state, read_checkpoint, run, run_normalized, scenario_from_metric, write_checkpoint, Checkpoint,
    FlowMode, NormalizedReference, RunOptions, RunOutcome, Termination,
};
use crflab_core::geometry::linalg;
use crflab_core::geometry::snapshot::{self, Snapshot};
use crflab_core::model::{
    hopf, verify_hopf_flow, verify_hopf_trace_chain, HopfExplicitSolution, HopfSampleSet, TestPotential,
};
use crflab_core::surface::{classify, maximal_time, SurfaceFile};
use crflab_core::tensors::{chern_ricci, suite, IdentityContext};

use crate::failure::Failure;
use crate::manifest::ManifestBuilder;
use crate::plot;
use crate::Common;

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::validation(format!("{}: {e}", path.display())))
}

fn load_scenario(path: &Path) -> Result<Scenario, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::validation(format!("{}: {e}", path.display())))?;
    Ok(Scenario::parse(&text)?)
}

fn json_f64(v: f64) -> serde_json::Value {
    if v.is_finite() {
        json!(v)
    } else {
        json!(v.to_string())
    }
}

/// Monitors absent from a trajectory (normalized runs) reduce to infinities.
fn finite_or_null(v: f64) -> serde_json::Value {
    if v.is_finite() {
        json!(v)
    } else {
        serde_json::Value::Null
    }
}

// ---------------------------------------------------------------- identities

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    /// Chart preset: torus1, torus2 or torus3.
    #[arg(long, default_value = "torus2")]
    chart: String,
    #[arg(long, default_value_t = 64)]
    resolution: usize,
    /// Use the `[chart]` section of a scenario instead of a preset.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Number of random contexts (seeds `seed, seed + 1, ..`).
    #[arg(long, default_value_t = 1)]
    contexts: u64,
}

pub fn verify_identities(a: VerifyArgs) -> Result<(), Failure> {
    let seed = a.common.seed.unwrap_or(0);
    let mut mb = ManifestBuilder::new("verify-identities")
        .seed(seed)
        .arg("chart", &a.chart)
        .arg("resolution", a.resolution)
        .arg("contexts", a.contexts);
    let chart_cfg = match &a.scenario {
        Some(p) => {
            mb = mb.input_file("scenario", p)?;
            let sc = load_scenario(p)?;
            let mut c = sc.chart.ok_or_else(|| Failure::validation("scenario has no [chart] section"))?;
            c.resolution = a.resolution;
            c
        }
        None => ChartSpec::preset(&a.chart, a.resolution)?,
    };
    let (_, dir) = mb.write(a.common.out.as_deref())?;
    let chart = chart_cfg.build()?;
    let mut text = String::new();
    let mut failed = 0;
    for s in seed..seed + a.contexts {
        let ctx = IdentityContext::random(&chart, s)?;
        for r in suite::run_all(&ctx)? {
            let _ = writeln!(text, "seed={s} {r}");
            if !r.passed {
                failed += 1;
            }
        }
    }
    print!("{text}");
    write(&dir.join("identities.txt"), &text)?;
    if failed > 0 {
        return Err(Failure::numerical(format!("{failed} identity checks above tolerance")));
    }
    Ok(())
}

// ---------------------------------------------------------------- flows

#[derive(Debug, Args)]
pub struct FlowArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    scenario: PathBuf,
    /// Override the chart resolution.
    #[arg(long)]
    resolution: Option<usize>,
    /// Override the stationarity tolerance.
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    checkpoint_every: Option<usize>,
    /// Continue from a checkpoint written by an earlier run.
    #[arg(long)]
    resume: Option<PathBuf>,
}

fn summary_json(out: &RunOutcome, ric_sup: f64, a_const: f64) -> serde_json::Value {
    let (q1, q0, psi) = out.record.monotonicity_defects();
    let term = match &out.termination {
        Termination::ReachedEnd => "reached-end".to_string(),
        Termination::Converged => "converged".to_string(),
        Termination::StepBudget => "step-budget".to_string(),
        Termination::Failed(e) => format!("failed: {e}"),
    };
    json!({
        "termination": term,
        "t": out.state.t,
        "steps": out.record.rows.len() - 1,
        "min_eig": out.state.min_eig,
        "ric_sup": ric_sup,
        "a_const": a_const,
        "max_q1_increase": finite_or_null(q1),
        "min_q0_decrease": finite_or_null(q0),
        "max_psi_increase": finite_or_null(psi),
        "notes": out.notes,
    })
}

pub fn run_flow(a: FlowArgs, normalized: bool) -> Result<(), Failure> {
    let name = if normalized { "run-normalized" } else { "run-flow" };
    let mut sc = load_scenario(&a.scenario)?;
    if let Some(s) = a.common.seed {
        sc.seed = s;
    }
    if let (Some(r), Some(c)) = (a.resolution, sc.chart.as_mut()) {
        c.resolution = r;
    }
    let fs_spec = sc.flow.clone().ok_or_else(|| Failure::validation("scenario has no [flow] section"))?;
    let mut flow = fs_spec;
    if let Some(t) = a.tolerance {
        flow.convergence.tol = t;
    }
    let every = a.checkpoint_every.or(sc.monitors.checkpoint_every);
    let mut mb = ManifestBuilder::new(name)
        .input_file("scenario", &a.scenario)?
        .seed(sc.seed)
        .opt_arg("resolution", a.resolution)
        .opt_arg("tolerance", a.tolerance)
        .opt_arg("checkpoint-every", every);
    if let Some(r) = &a.resume {
        mb = mb.input_file("resume", r)?;
    }
    let (_, dir) = mb.write(a.common.out.as_deref())?;

    let chart = sc.chart()?;
    let g0 = sc.metric(&chart)?;
    let f = flow.f.as_ref().map(|p| p.build(&chart, sc.seed));
    let scenario = scenario_from_metric(g0, flow.t0, f)?
        .with_step(flow.step)
        .with_convergence(flow.convergence)
        .with_mode(if normalized { FlowMode::Normalized } else { flow.mode });
    let resume = match &a.resume {
        Some(p) => Some(read_checkpoint(p, &chart)?),
        None => None,
    };
    let opts = RunOptions {
        t_end: flow.t_end,
        schwarz: sc.monitors.schwarz,
        checkpoint_every: every,
        checkpoint_path: every.map(|_| dir.join("checkpoint.ckpt")),
        max_steps: flow.max_steps,
        sample_times: Vec::new(),
    };
    let out = if scenario.mode == FlowMode::Normalized {
        let reference = match flow.reference {
            ReferenceSpec::Volume => NormalizedReference::Volume,
            ReferenceSpec::Acknowledged => NormalizedReference::Acknowledged,
        };
        run_normalized(&scenario, reference, resume, &opts)?
    } else {
        let reg = equations();
        let eq = reg.get(scenario.mode.name()).map_err(Failure::validation)?;
        let init = match resume {
            Some(ck) => initial_state(&scenario, eq, Some(ck.phi), ck.t)?,
            None => initial_state(&scenario, eq, None, 0.0)?,
        };
        run(&scenario, eq, init, &opts)?
    };

    write(&dir.join(&sc.output.csv), out.record.to_csv())?;
    let last_dt = out.record.last().map(|r| r.dt).filter(|d| *d > 0.0).unwrap_or(scenario.step.initial_dt);
    write_checkpoint(&dir.join("final.ckpt"), &Checkpoint { t: out.state.t, dt: last_dt, phi: out.state.phi.clone() })?;
    let ric = chern_ricci(&out.state.omega)?.sup_norm();
    let summary = summary_json(&out, ric, scenario.a_const);
    write(&dir.join("summary.json"), serde_json::to_string_pretty(&summary).expect("json") + "\n")?;
    println!("{}", serde_json::to_string(&summary).expect("json"));
    if let Termination::Failed(e) = &out.termination {
        return Err(Failure::numerical(format!(
            "{e}; last good state t = {} (min eigenvalue {:e}) saved to {}",
            out.state.t,
            out.state.min_eig,
            dir.join("final.ckpt").display()
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------- Hopf

#[derive(Debug, Args)]
pub struct HopfExplicitArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long)]
    t: f64,
    #[arg(long, default_value_t = 100)]
    points: usize,
    /// Hopf modulus `|alpha|` (all entries equal).
    #[arg(long, default_value_t = 2.0)]
    modulus: f64,
}

pub fn hopf_explicit(a: HopfExplicitArgs) -> Result<(), Failure> {
    let seed = a.common.seed.unwrap_or(0);
    let (_, dir) = ManifestBuilder::new("hopf-explicit")
        .seed(seed)
        .arg("n", a.n)
        .arg("t", a.t)
        .arg("points", a.points)
        .arg("modulus", a.modulus)
        .write(a.common.out.as_deref())?;
    let sol = HopfExplicitSolution::new(a.n, a.t)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts = HopfSampleSet::random(a.n, a.modulus, a.points, &mut rng)?;
    let mut csv = String::from("point,r");
    for k in 0..a.n {
        let _ = write!(csv, ",lambda_{k}");
    }
    for k in 0..a.n {
        let _ = write!(csv, ",r2_lambda_{k}");
    }
    csv.push('\n');
    for (i, z) in pts.points().iter().enumerate() {
        let r2: f64 = z.iter().map(|c| c.norm_sqr()).sum();
        let ev = linalg::hermitian_eigenvalues(&sol.metric(z), a.n);
        let _ = write!(csv, "{i},{:.16e}", r2.sqrt());
        for e in &ev {
            let _ = write!(csv, ",{e:.16e}");
        }
        for e in &ev {
            let _ = write!(csv, ",{:.16e}", e * r2);
        }
        csv.push('\n');
    }
    write(&dir.join("hopf_explicit.csv"), &csv)?;
    let scaled = sol.scaled_eigenvalues();
    println!("n = {} t = {} eigenvalues of omega(t) = {:?} x r^-2", a.n, a.t, scaled);
    println!("det omega(t) = (1 - n t)^(n-1) / r^(2n); table in {}", dir.join("hopf_explicit.csv").display());
    Ok(())
}

#[derive(Debug, Args)]
pub struct HopfVerifyArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long, default_value_t = 100)]
    points: usize,
    #[arg(long, default_value_t = 2.0)]
    modulus: f64,
}

pub fn hopf_verify(a: HopfVerifyArgs) -> Result<(), Failure> {
    let seed = a.common.seed.unwrap_or(0);
    let (_, dir) = ManifestBuilder::new("hopf-verify")
        .seed(seed)
        .arg("n", a.n)
        .arg("points", a.points)
        .arg("modulus", a.modulus)
        .write(a.common.out.as_deref())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts = HopfSampleSet::random(a.n, a.modulus, a.points, &mut rng)?;
    let nf = a.n as f64;
    let times = [0.0, 0.1, 0.2, 0.3 * 2.0 / nf];
    let rep = verify_hopf_flow(&pts, &times)?;
    let mut checks = vec![
        ("flow-closed-form", rep.residual, 1e-10),
        ("flow-fd-in-t", rep.fd_residual, 1e-6),
        ("determinant", rep.det_residual, 1e-12),
        ("limit-form", rep.limit_residual, 1e-10),
        ("eigenvalues", rep.eigen_residual, 1e-12),
        ("deck-invariance", hopf::deck_defect(&pts, 0.1)?, 1e-12),
    ];
    for &t in &[0.0, 0.1] {
        if t < 1.0 / nf {
            let chain = verify_hopf_trace_chain(&pts, t, &TestPotential::default())?;
            checks.push(("trace-chain-equalities", chain.max_equality_residual(), 1e-10));
            checks.push(("trace-chain-violation", chain.violation, 1e-10));
        }
    }
    let mut text = String::new();
    let mut failed = 0;
    for (name, r, tol) in &checks {
        let ok = *r <= *tol;
        failed += usize::from(!ok);
        let _ = writeln!(
            text,
            "check={name} residual={r:.6e} tolerance={tol:.1e} status={}",
            if ok { "pass" } else { "fail" }
        );
    }
    print!("{text}");
    write(&dir.join("hopf_verify.txt"), &text)?;
    if failed > 0 {
        return Err(Failure::numerical(format!("{failed} Hopf checks above tolerance")));
    }
    Ok(())
}

// ---------------------------------------------------------------- elliptic

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    scenario: PathBuf,
    /// gill-flow or newton-continuation.
    #[arg(long)]
    method: Option<String>,
    /// mean-zero or sup-zero.
    #[arg(long)]
    normalization: Option<String>,
    /// Comma-separated exponents A for C(A).
    #[arg(long, value_delimiter = ',')]
    a_grid: Option<Vec<f64>>,
    #[arg(long)]
    resolution: Option<usize>,
    #[arg(long)]
    tolerance: Option<f64>,
}

pub fn solve_ma(a: SolveArgs) -> Result<(), Failure> {
    let mut sc = load_scenario(&a.scenario)?;
    if let Some(s) = a.common.seed {
        sc.seed = s;
    }
    if let (Some(r), Some(c)) = (a.resolution, sc.chart.as_mut()) {
        c.resolution = r;
    }
    let mut ell = sc.elliptic.clone().ok_or_else(|| Failure::validation("scenario has no [elliptic] section"))?;
    if let Some(m) = &a.method {
        ell.method = m.clone();
    }
    if let Some(n) = &a.normalization {
        ell.normalization = match n.as_str() {
            "mean-zero" => Normalization::MeanZero,
            "sup-zero" => Normalization::SupZero,
            other => return Err(Failure::validation(format!("unknown normalization `{other}`"))),
        };
    }
    if let Some(g) = &a.a_grid {
        ell.a_grid = g.clone();
    }
    let (_, dir) = ManifestBuilder::new("solve-ma")
        .input_file("scenario", &a.scenario)?
        .seed(sc.seed)
        .arg("method", &ell.method)
        .arg("normalization", format!("{:?}", ell.normalization))
        .arg("a-grid", format!("{:?}", ell.a_grid))
        .opt_arg("resolution", a.resolution)
        .opt_arg("tolerance", a.tolerance)
        .write(a.common.out.as_deref())?;

    let reg = methods();
    let method = reg.get(&ell.method).map_err(Failure::validation)?;
    let chart = sc.chart()?;
    let omega = sc.metric(&chart)?;
    let (problem, exact) = match (&ell.f, &ell.manufactured) {
        (Some(_), Some(_)) => return Err(Failure::validation("[elliptic] sets both f and manufactured")),
        (None, Some(p)) => {
            let phi_star = p.build(&chart, sc.seed);
            let pr = manufactured_problem(omega, &phi_star, ell.normalization)?;
            (pr, Some(ell.normalization.apply(&phi_star)))
        }
        (f, None) => {
            let f = f.as_ref().map(|p| p.build(&chart, sc.seed));
            let f = f.unwrap_or_else(|| crflab_core::geometry::ScalarField::zeros(chart.clone()));
            (EllipticProblem::new(omega, f, ell.normalization)?, None)
        }
    };
    let mut opts = SolveOptions::default();
    if let Some(t) = a.tolerance.or(ell.tolerance) {
        opts.tolerance = t;
    }
    let sol = method.solve(&problem, &opts)?;
    let est = certify_estimates(&problem, &sol, &ell.a_grid)?;
    let err = exact.map(|e| {
        sol.phi.values().iter().zip(e.values()).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
    });
    write(&dir.join("phi.snap"), snapshot::encode(&Snapshot::Scalar(sol.phi.clone())))?;
    let mut csv = String::from("a,c_a\n");
    for (aa, c) in &est.constants {
        let _ = writeln!(csv, "{aa:.16e},{c:.16e}");
    }
    write(&dir.join("estimates.csv"), &csv)?;
    let summary = json!({
        "method": sol.method,
        "b": sol.b,
        "residual": sol.residual,
        "oscillation": sol.oscillation,
        "iterations": sol.iterations,
        "max_trace": est.max_trace,
        "kahler_b": problem.kahler_b(),
        "manufactured_error": err,
    });
    write(&dir.join("solution.json"), serde_json::to_string_pretty(&summary).expect("json") + "\n")?;
    println!("{}", serde_json::to_string(&summary).expect("json"));
    Ok(())
}

// ---------------------------------------------------------------- surfaces

#[derive(Debug, Args)]
pub struct MaxTimeArgs {
    #[command(flatten)]
    common: Common,
    /// Surface data file with a `[surface]` section.
    #[arg(long, alias = "scenario")]
    data: PathBuf,
}

pub fn max_time(a: MaxTimeArgs) -> Result<(), Failure> {
    let (_, dir) = ManifestBuilder::new("max-time").input_file("data", &a.data)?.write(a.common.out.as_deref())?;
    let text = fs::read_to_string(&a.data).map_err(|e| Failure::validation(format!("{}: {e}", a.data.display())))?;
    let file = SurfaceFile::parse(&text)?;
    let data = &file.surface;
    let res = maximal_time(data)?;
    let report = classify(data, &res)?;
    let record = json!({
        "label": file.label,
        "t_max": json_f64(res.t_max),
        "binding": res.binding.to_string(),
        "case": res.case.to_string(),
        "poly_0": res.volume_poly[0],
        "poly_1": res.volume_poly[1],
        "poly_2": res.volume_poly[2],
    });
    write(&dir.join("result.json"), serde_json::to_string(&record).expect("json") + "\n")?;
    write(&dir.join("report.txt"), report.to_string())?;
    println!("T = {} binding = {} case ({})", res.t_max, res.binding, res.case);
    print!("{report}");
    Ok(())
}

// ---------------------------------------------------------------- plot

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[command(flatten)]
    common: Common,
    /// Trajectory CSV written by run-flow or run-normalized.
    #[arg(long)]
    csv: PathBuf,
    /// Comma-separated column names.
    #[arg(long, value_delimiter = ',', required = true)]
    columns: Vec<String>,
    #[arg(long)]
    title: Option<String>,
}

pub fn plot(a: PlotArgs) -> Result<(), Failure> {
    let (_, dir) = ManifestBuilder::new("plot")
        .input_file("csv", &a.csv)?
        .arg("columns", a.columns.join(","))
        .opt_arg("title", a.title.as_ref())
        .write(a.common.out.as_deref())?;
    let series = plot::read_series(&a.csv, &a.columns)?;
    let title = a.title.unwrap_or_else(|| a.columns.join(", "));
    let svg = plot::render_svg(&series, &title);
    let path = dir.join("plot.svg");
    write(&path, svg)?;
    println!("{}", path.display());
    Ok(())
}
