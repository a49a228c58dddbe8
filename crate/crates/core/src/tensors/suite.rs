//! Registry of identity checks run by `verify-identities`, and the flat
//! key-value report line they produce.

use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{i_ddbar, min_eigenvalue, spectral, ChartRef, FormField, HermitianMatrixField, MetricField, ScalarField};
use crate::model::{random_potential, RandomRecipeOptions, TorusMetricRecipe};
use crate::registry::{Named, Registry};

use super::chern::{chern_ricci, ChernGeometry};
use super::identities::{
    closedness_defect, verify_bianchi_vanishing, verify_schwarz_identity, verify_trace_evolution,
    TraceEvolutionInput,
};
use super::TensorError;

type C = Complex64;
const ZERO: C = C::new(0.0, 0.0);

/// Seeded data shared by all checks of one suite run.
#[derive(Debug, Clone)]
pub struct IdentityContext {
    pub seed: u64,
    /// Generic non-Kähler metric.
    pub g0: MetricField,
    /// Independent non-Kähler reference metric.
    pub ghat: MetricField,
    /// Constant base plus `i ddbar` of a potential.
    pub kahler: MetricField,
    /// Closed real (1,1)-form.
    pub chi: FormField,
    pub phi: ScalarField,
    pub t: f64,
}

impl IdentityContext {
    /// Draws every field from `seed` alone, so the same seed on a finer
    /// chart yields the same continuous data resampled.
    pub fn random(chart: &ChartRef, seed: u64) -> Result<Self, TensorError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let opts = RandomRecipeOptions::default();
        let g0 = build(chart, &TorusMetricRecipe::random(chart, &mut rng, opts))?;
        let ghat = build(chart, &TorusMetricRecipe::random(chart, &mut rng, opts))?;
        let kahler_opts = RandomRecipeOptions { kahler: true, ..opts };
        let kahler = build(chart, &TorusMetricRecipe::random(chart, &mut rng, kahler_opts))?;

        let n = chart.complex_dim();
        let mut c0 = vec![ZERO; n * n];
        for i in 0..n {
            c0[i * n + i] = C::new(rng.gen_range(-0.3..0.3), 0.0);
            for j in i + 1..n {
                let v = C::new(rng.gen_range(-0.1..0.1), rng.gen_range(-0.1..0.1));
                c0[i * n + j] = v;
                c0[j * n + i] = v.conj();
            }
        }
        let psi = random_potential(chart, &mut rng, 3, 0.2, 2);
        let chi = HermitianMatrixField::constant(chart.clone(), &c0)?.add(&i_ddbar(&psi))?;
        let phi0 = random_potential(chart, &mut rng, 4, 0.15, 2);
        let t = rng.gen_range(0.1..0.5);
        let mut scale = 1.0;
        loop {
            let phi = phi0.map(|v| v * scale);
            let omega = g0.combine(&chi, 1.0, t)?.add(&i_ddbar(&phi))?;
            if min_eigenvalue(&omega) > 0.1 || scale < 1e-3 {
                let chi = chi.scale(scale);
                return Ok(IdentityContext { seed, g0, ghat, kahler, chi, phi, t });
            }
            scale *= 0.5;
        }
    }

    pub fn chart(&self) -> &ChartRef {
        self.g0.chart()
    }
}

fn build(chart: &ChartRef, recipe: &TorusMetricRecipe) -> Result<MetricField, TensorError> {
    recipe.build(chart).map_err(|e| TensorError::InvalidData(e.to_string()))
}

/// One line of a verification report.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    pub identity: String,
    pub residual: f64,
    pub grid: String,
    pub tolerance: f64,
    pub passed: bool,
}

impl IdentityReport {
    pub fn new(identity: &str, residual: f64, grid: String, tolerance: f64) -> Self {
        IdentityReport {
            identity: identity.to_string(),
            residual,
            grid,
            tolerance,
            passed: residual.is_finite() && residual <= tolerance,
        }
    }

    /// Parses a line written by `Display`.
    pub fn parse_line(line: &str) -> Option<Self> {
        let mut identity = None;
        let mut residual = None;
        let mut grid = None;
        let mut tolerance = None;
        let mut passed = None;
        for pair in line.split_whitespace() {
            let (k, v) = pair.split_once('=')?;
            match k {
                "identity" => identity = Some(v.to_string()),
                "residual" => residual = v.parse().ok(),
                "grid" => grid = Some(v.to_string()),
                "tolerance" => tolerance = v.parse().ok(),
                "status" => {
                    passed = match v {
                        "pass" => Some(true),
                        "fail" => Some(false),
                        _ => None,
                    }
                }
                _ => return None,
            }
        }
        Some(IdentityReport {
            identity: identity?,
            residual: residual?,
            grid: grid?,
            tolerance: tolerance?,
            passed: passed?,
        })
    }
}

impl fmt::Display for IdentityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "identity={} residual={:.6e} grid={} tolerance={:.1e} status={}",
            self.identity,
            self.residual,
            self.grid,
            self.tolerance,
            if self.passed { "pass" } else { "fail" }
        )
    }
}

/// A numerically certified identity.
pub trait IdentityCheck: Named + Send + Sync {
    fn tolerance(&self) -> f64;
    /// Largest pointwise defect of the identity on the context data.
    fn residual(&self, ctx: &IdentityContext) -> Result<f64, TensorError>;

    fn run(&self, ctx: &IdentityContext) -> Result<IdentityReport, TensorError> {
        let r = self.residual(ctx)?;
        Ok(IdentityReport::new(self.name(), r, ctx.chart().grid_label(), self.tolerance()))
    }
}

macro_rules! check {
    ($ty:ident, $name:literal, $tol:expr, |$ctx:ident| $body:expr) => {
        pub struct $ty;
        impl Named for $ty {
            fn name(&self) -> &'static str {
                $name
            }
        }
        impl IdentityCheck for $ty {
            fn tolerance(&self) -> f64 {
                $tol
            }
            fn residual(&self, $ctx: &IdentityContext) -> Result<f64, TensorError> {
                $body
            }
        }
    };
}

fn trace_input(ctx: &IdentityContext) -> TraceEvolutionInput {
    TraceEvolutionInput {
        g0: ctx.g0.clone(),
        ghat: ctx.ghat.clone(),
        chi: ctx.chi.clone(),
        phi: ctx.phi.clone(),
        t: ctx.t,
    }
}

check!(TraceEvolution, "trace-evolution", 1e-6, |ctx| {
    Ok(verify_trace_evolution(&trace_input(ctx))?.residual)
});

check!(TraceEvolutionBounds, "trace-evolution-bounds", 1e-8, |ctx| {
    let r = verify_trace_evolution(&trace_input(ctx))?;
    Ok(r.violation_i.max(r.violation_ii).max(r.violation_iii).max(0.0))
});

check!(BianchiVanishing, "bianchi-vanishing", 1e-7, |ctx| {
    Ok(verify_bianchi_vanishing(&ctx.ghat)?.residual)
});

check!(Schwarz, "schwarz", 1e-7, |ctx| {
    Ok(verify_schwarz_identity(&ctx.g0, &ctx.ghat)?.residual)
});

check!(RicciTrace, "ricci-trace", 1e-8, |ctx| {
    let a = chern_ricci(&ctx.g0)?;
    let b = ChernGeometry::new(&ctx.g0)?.ricci_from_curvature();
    Ok(a.sub(&b)?.sup_norm())
});

check!(RicciClosed, "ricci-closed", 1e-9, |ctx| {
    Ok(closedness_defect(&chern_ricci(&ctx.g0)?))
});

check!(KahlerTorsion, "kahler-torsion", 1e-10, |ctx| {
    Ok(ChernGeometry::new(&ctx.kahler)?.torsion.sup_abs())
});

check!(CurvatureConjugation, "curvature-conjugation", 1e-10, |ctx| {
    let geo = ChernGeometry::new(&ctx.g0)?;
    let n = geo.data().n;
    let mut worst = 0.0f64;
    for k in 0..n {
        for l in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let a = geo.curvature.lowered(k, l, i, j);
                    let b = geo.curvature.lowered(l, k, j, i);
                    for (x, y) in a.iter().zip(b) {
                        worst = worst.max((x.conj() - y).norm());
                    }
                }
            }
        }
    }
    Ok(worst)
});

check!(MetricCompatibility, "metric-compatibility", 1e-9, |ctx| {
    // d_k g_{i jbar} - Gamma^p_{ki} g_{p jbar}, with the metric derivative
    // recomputed from scratch.
    let geo = ChernGeometry::new(&ctx.g0)?;
    let md = geo.data();
    let n = md.n;
    let nodes = md.chart.node_count();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let d = spectral::del(&md.chart, &ctx.g0.component(i, j));
            for (k, dk) in d.iter().enumerate() {
                for node in 0..nodes {
                    let mut s = dk[node];
                    for p in 0..n {
                        s -= geo.connection.get(p, k, i)[node] * md.at(p, j, node);
                    }
                    worst = worst.max(s.norm());
                }
            }
        }
    }
    Ok(worst)
});

check!(Commutation, "commutation", 1e-7, |ctx| {
    commutation_residual(&ctx.g0, ctx.seed)
});

/// `[nabla_k, nabla_lbar] X^i - R_{k lbar j}^i X^j` for a random smooth
/// vector field `X`, both covariant derivatives taken spectrally.
pub fn commutation_residual(g: &MetricField, seed: u64) -> Result<f64, TensorError> {
    let geo = ChernGeometry::new(g)?;
    let chart = geo.data().chart.clone();
    let n = geo.data().n;
    let nodes = chart.node_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let x: Vec<Vec<C>> = (0..n)
        .map(|_| {
            let re = random_potential(&chart, &mut rng, 3, 1.0, 2);
            let im = random_potential(&chart, &mut rng, 3, 1.0, 2);
            re.values().iter().zip(im.values()).map(|(&a, &b)| C::new(a, b)).collect()
        })
        .collect();
    // (nabla X)^i_k = d_k X^i + Gamma^i_{kj} X^j ; (nabla X)^i_lbar = dbar_l X^i
    let mut nab = vec![vec![ZERO; nodes]; n * n];
    let mut nab_bar = vec![Vec::new(); n * n];
    for i in 0..n {
        let (d, db) = spectral::gradient(&chart, &x[i]);
        for k in 0..n {
            let out = &mut nab[i * n + k];
            for node in 0..nodes {
                let mut s = d[k][node];
                for j in 0..n {
                    s += geo.connection.get(i, k, j)[node] * x[j][node];
                }
                out[node] = s;
            }
        }
        for (l, v) in db.into_iter().enumerate() {
            nab_bar[i * n + l] = v;
        }
    }
    let mut worst = 0.0f64;
    for i in 0..n {
        for l in 0..n {
            // nabla_k of the (1,0)-vector-valued (0,1)-form nab_bar: only the
            // upper index picks up a connection term.
            let d_nab_bar = spectral::del(&chart, &nab_bar[i * n + l]);
            for k in 0..n {
                let dbar_nab = &spectral::dbar(&chart, &nab[i * n + k])[l];
                for node in 0..nodes {
                    let mut lhs = d_nab_bar[k][node] - dbar_nab[node];
                    for j in 0..n {
                        lhs += geo.connection.get(i, k, j)[node] * nab_bar[j * n + l][node];
                    }
                    let mut rhs = ZERO;
                    for j in 0..n {
                        rhs += geo.curvature.mixed(k, l, j, i)[node] * x[j][node];
                    }
                    worst = worst.max((lhs - rhs).norm());
                }
            }
        }
    }
    Ok(worst)
}

/// All checks, keyed by name.
pub fn registry() -> Registry<dyn IdentityCheck> {
    let mut reg: Registry<dyn IdentityCheck> = Registry::new("identity check");
    reg.register(Box::new(TraceEvolution))
        .register(Box::new(TraceEvolutionBounds))
        .register(Box::new(BianchiVanishing))
        .register(Box::new(Schwarz))
        .register(Box::new(RicciTrace))
        .register(Box::new(RicciClosed))
        .register(Box::new(KahlerTorsion))
        .register(Box::new(CurvatureConjugation))
        .register(Box::new(MetricCompatibility))
        .register(Box::new(Commutation));
    reg
}

/// Runs every registered check on one context.
pub fn run_all(ctx: &IdentityContext) -> Result<Vec<IdentityReport>, TensorError> {
    registry().iter().map(|c| c.run(ctx)).collect()
}
