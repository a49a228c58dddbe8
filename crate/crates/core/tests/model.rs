use std::f64::consts::PI;

use num_complex::Complex64 as C;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crflab_core::geometry::{linalg, min_eigenvalue, TorusChart};
use crflab_core::model::hopf::{deck_defect, hopf_metric, hopf_ricci, limit_form};
use crflab_core::model::{
    integrate_hopf, verify_hopf_flow, verify_hopf_trace_chain,
    GaussLegendre, HopfExplicitSolution, HopfIntegrand, HopfQuadrature, HopfSampleSet, ModelError,
    RandomRecipeOptions, TestPotential, TorusMetricRecipe,
};

fn max_diff(a: &[C], b: &[C]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).norm()))
}

fn samples(n: usize, count: usize, seed: u64) -> HopfSampleSet {
    HopfSampleSet::random(n, 2.0, count, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

/// `(a delta + b zbar_i z_j / r^2) / r^2`, written out independently.
fn invariant(z: &[C], a: f64, b: f64) -> Vec<C> {
    let n = z.len();
    let r2: f64 = z.iter().map(|v| v.norm_sqr()).sum();
    let mut m = vec![C::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            let d = if i == j { a } else { 0.0 };
            m[i * n + j] = (C::new(d, 0.0) + b * z[i].conj() * z[j] / r2) / r2;
        }
    }
    m
}

#[test]
fn gauss_legendre_integrates_polynomials() {
    let gl = GaussLegendre::new(8);
    let v: f64 = gl.on(0.0, 2.0).map(|(x, w)| w * x.powi(15)).sum();
    assert!((v - 2f64.powi(16) / 16.0).abs() < 1e-9);
    let total: f64 = gl.weights.iter().sum();
    assert!((total - 2.0).abs() < 1e-14);
}

#[test]
fn hopf_ricci_matches_log_det_formula() {
    // det omega_H = r^{-2n}, so Ric = n (delta / r^2 - zbar z / r^4).
    for n in [2usize, 3] {
        for z in samples(n, 20, 1).points() {
            assert!(max_diff(&hopf_metric(z), &invariant(z, 1.0, 0.0)) < 1e-15);
            assert!(max_diff(&hopf_ricci(z), &invariant(z, n as f64, -(n as f64))) < 1e-14);
        }
    }
}

#[test]
fn explicit_solution_eigenvalues_and_determinant() {
    for (n, t) in [(2usize, 0.25), (3, 0.1), (2, 0.0)] {
        let sol = HopfExplicitSolution::new(n, t).unwrap();
        let nt = n as f64 * t;
        let mut expect = vec![1.0 - nt; n - 1];
        expect.push(1.0);
        assert_eq!(sol.scaled_eigenvalues(), expect);
        for z in samples(n, 20, 2).points() {
            let r2: f64 = z.iter().map(|v| v.norm_sqr()).sum();
            let ev = linalg::hermitian_eigenvalues(&sol.metric(z), n);
            for (a, b) in ev.iter().zip(&expect) {
                assert!((a * r2 - b).abs() < 1e-13);
            }
            let det = (1.0 - nt).powi(n as i32 - 1) / r2.powi(n as i32);
            assert!((sol.determinant(z) - det).abs() < 1e-13 * det);
        }
    }
    assert_eq!(HopfExplicitSolution::new(2, 0.25).unwrap().scaled_eigenvalues(), vec![0.5, 1.0]);
}

#[test]
fn ricci_of_explicit_solution_is_time_independent() {
    // omega(t)^n is a constant multiple of omega_H^n.
    for n in [2usize, 3] {
        for t in [0.0, 0.1, 0.2] {
            let sol = HopfExplicitSolution::new(n, t).unwrap();
            for z in samples(n, 10, 3).points() {
                let ric = sol.jet(z).chern_ricci().unwrap();
                assert!(max_diff(&ric, &hopf_ricci(z)) < 1e-11);
                let fd: Vec<C> = {
                    let h = 1e-5;
                    let a = HopfExplicitSolution::new(n, t + h).unwrap().metric(z);
                    let b = HopfExplicitSolution { n, t: (t - h).max(0.0) }.metric(z);
                    let span = t + h - (t - h).max(0.0);
                    a.iter().zip(&b).map(|(x, y)| (x - y) / span).collect()
                };
                let minus_ric: Vec<C> = ric.iter().map(|v| -v).collect();
                assert!(max_diff(&fd, &minus_ric) < 1e-8);
            }
        }
    }
}

#[test]
fn limit_form_is_degenerate_projection() {
    for z in samples(2, 10, 4).points() {
        let r2: f64 = z.iter().map(|v| v.norm_sqr()).sum();
        let l = limit_form(z);
        assert!(max_diff(&l, &invariant(z, 0.0, 1.0)) < 1e-15);
        let ev = linalg::hermitian_eigenvalues(&l, 2);
        assert!(ev[0].abs() < 1e-14 && (ev[1] * r2 - 1.0).abs() < 1e-14);
    }
}

#[test]
fn explicit_solution_rejects_times_past_one_over_n() {
    assert!(matches!(HopfExplicitSolution::new(2, 0.5), Err(ModelError::Domain(_))));
    assert!(HopfExplicitSolution::new(3, 0.34).is_err());
    assert!(HopfExplicitSolution::new(2, -0.1).is_err());
}

#[test]
fn sample_set_validation() {
    let alpha = vec![C::new(2.0, 0.0), C::new(0.0, 2.0)];
    assert!(HopfSampleSet::new(alpha.clone(), vec![vec![C::new(0.5, 0.0), C::new(0.0, 0.0)]]).is_err());
    assert!(HopfSampleSet::new(alpha.clone(), vec![vec![C::new(1.5, 0.0), C::new(0.0, 0.0)]]).is_ok());
    assert!(HopfSampleSet::new(vec![C::new(2.0, 0.0), C::new(3.0, 0.0)], Vec::new()).is_err());
    assert!(HopfSampleSet::new(vec![C::new(2.0, 0.0)], Vec::new()).is_err());
    let s = samples(3, 50, 5);
    for z in s.points() {
        let r: f64 = z.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        assert!((1.0..2.0).contains(&r));
    }
}

#[test]
fn flow_verification_and_chain() {
    for n in [2usize, 3] {
        let pts = samples(n, 100, 6);
        let times = [0.0, 0.1, 0.2, 0.3 * 2.0 / n as f64];
        let rep = verify_hopf_flow(&pts, &times).unwrap();
        assert!(rep.residual <= 1e-10 && rep.fd_residual <= 1e-6);
        assert!(rep.det_residual <= 1e-12 && rep.limit_residual <= 1e-10);
        assert!(deck_defect(&pts, 0.1).unwrap() < 1e-12);
        let chain = verify_hopf_trace_chain(&pts, 0.1, &TestPotential::default()).unwrap();
        assert!(chain.max_equality_residual() < 1e-10);
        assert!(chain.violation <= 1e-10);
    }
}

#[test]
fn quadrature_matches_closed_form_volumes() {
    // omega_H^2 = 8 r^{-4} dV and omega_H ^ Ric = 8 r^{-4} dV; shells have
    // area 2 pi^2 r^3, so both integrals equal 16 pi^2 log |alpha|.
    let q = HopfQuadrature { modulus: 2.0, order: 12 };
    let v = 16.0 * PI * PI * 2f64.ln();
    let vol = integrate_hopf(q, HopfIntegrand::Omega0Squared).unwrap();
    let pair = integrate_hopf(q, HopfIntegrand::Omega0WedgeRic).unwrap();
    let c1 = integrate_hopf(q, HopfIntegrand::RicSquared).unwrap();
    assert!((vol - v).abs() < 1e-10 * v);
    assert!((pair - v).abs() < 1e-10 * v);
    assert!(c1.abs() < 1e-10);
    // omega(t)^2 = (1 - 2t) omega_H^2 for n = 2.
    let vt = integrate_hopf(q, HopfIntegrand::ExplicitVolume(0.2)).unwrap();
    assert!((vt - 0.6 * v).abs() < 1e-10 * v);
    assert!(integrate_hopf(HopfQuadrature { modulus: 0.5, order: 12 }, HopfIntegrand::Omega0Squared).is_err());
    assert!("omega0^2".parse::<HopfIntegrand>().is_ok());
    assert!("nope".parse::<HopfIntegrand>().is_err());
}

#[test]
fn recipe_rejects_unresolved_waves() {
    let chart = TorusChart::uniform(1, 8, 1.0, vec![0]).unwrap();
    let text = r#"
base = [[1.0, 0.0]]
[[perturbations]]
component = [0, 0]
amplitude = [0.1, 0.0]
wave = [5, 0]
"#;
    let recipe: TorusMetricRecipe = toml::from_str(text).unwrap();
    assert!(matches!(recipe.build(&chart), Err(ModelError::InvalidRecipe(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_recipes_are_positive_definite(seed in 0u64..u64::MAX, kahler in any::<bool>()) {
        let chart = TorusChart::uniform(2, 16, 1.0, vec![0, 2]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let recipe = TorusMetricRecipe::random(&chart, &mut rng, RandomRecipeOptions { kahler, ..Default::default() });
        let g = recipe.build(&chart).unwrap();
        prop_assert!(min_eigenvalue(&g) > 0.0);
        let again = TorusMetricRecipe::random(&chart, &mut ChaCha8Rng::seed_from_u64(seed), RandomRecipeOptions { kahler, ..Default::default() });
        prop_assert_eq!(again, recipe);
    }

    #[test]
    fn explicit_metric_is_deck_invariant(seed in 0u64..10_000, t in 0.0f64..0.45) {
        // Pulling back along z -> alpha z multiplies the coefficients by |alpha|^2.
        let sol = HopfExplicitSolution::new(2, t).unwrap();
        for z in samples(2, 5, seed).points() {
            let a = C::from_polar(2.0, 0.7);
            let w: Vec<C> = z.iter().map(|v| a * v).collect();
            let lhs: Vec<C> = sol.metric(&w).iter().map(|v| v * a.norm_sqr()).collect();
            prop_assert!(max_diff(&lhs, &sol.metric(z)) < 1e-13);
        }
    }
}
