use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crflab_core::elliptic::{
    bicgstab, certify_estimates, manufactured_problem, methods, refinement_stable_a, solve_elliptic, EllipticError,
    EllipticProblem, EstimateReport, Normalization, SolveOptions,
};
use crflab_core::geometry::{ChartRef, MetricField, ScalarField, TorusChart};
use crflab_core::model::{random_potential, RandomRecipeOptions, TorusMetricRecipe};

fn sup_diff(a: &ScalarField, b: &ScalarField) -> f64 {
    a.values().iter().zip(b.values()).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

fn setup(chart: &ChartRef, seed: u64, kahler: bool, amp: f64) -> (MetricField, ScalarField) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = TorusMetricRecipe::random(chart, &mut rng, RandomRecipeOptions { kahler, ..Default::default() })
        .build(chart)
        .unwrap();
    let phi = random_potential(chart, &mut rng, 4, amp, 2);
    (g, phi)
}

/// `e^b = int omega^n / int e^F omega^n`, summed directly on the grid.
fn integral_b(omega: &MetricField, f: &ScalarField) -> f64 {
    let det = omega.determinant();
    let num: f64 = det.iter().sum();
    let den: f64 = det.iter().zip(f.values()).map(|(d, v)| d * v.exp()).sum();
    (num / den).ln()
}

#[test]
fn bicgstab_solves_small_nonsymmetric_system() {
    let a = [[4.0, 1.0, 0.0], [-2.0, 5.0, 1.0], [0.5, 0.0, 3.0]];
    let apply = |v: &[f64]| (0..3).map(|i| (0..3).map(|j| a[i][j] * v[j]).sum()).collect::<Vec<f64>>();
    let b = [1.0, 2.0, 3.0];
    let (x, rep) = bicgstab(apply, |v: &[f64]| v.to_vec(), &b, 1e-14, 50);
    assert!(rep.converged);
    let ax = apply(&x);
    for i in 0..3 {
        assert!((ax[i] - b[i]).abs() < 1e-12);
    }
}

#[test]
fn registry_lists_both_methods() {
    assert_eq!(methods().names(), vec!["gill-flow", "newton-continuation"]);
    let chart = TorusChart::uniform(1, 16, 1.0, vec![0]).unwrap();
    let p = EllipticProblem::new(MetricField::identity(chart.clone()), ScalarField::zeros(chart), Normalization::MeanZero)
        .unwrap();
    assert!(solve_elliptic(&p, "multigrid", &SolveOptions::default()).is_err());
}

#[test]
fn newton_recovers_manufactured_solution_in_one_variable() {
    let chart = TorusChart::uniform(1, 128, 1.0, vec![0]).unwrap();
    let (g, phi_star) = setup(&chart, 5, false, 0.3);
    let p = manufactured_problem(g, &phi_star, Normalization::MeanZero).unwrap();
    assert!(p.residual(&phi_star, 0.0) < 1e-13);
    let s = solve_elliptic(&p, "newton-continuation", &SolveOptions::default()).unwrap();
    assert!(sup_diff(&s.phi, &Normalization::MeanZero.apply(&phi_star)) < 1e-6);
    assert!(s.b.abs() < 1e-9);
    assert!(s.residual <= 1e-10);
    assert!(s.phi.mean().abs() < 1e-13);
}

#[test]
fn gill_flow_recovers_manufactured_solution() {
    let chart = TorusChart::uniform(1, 32, 1.0, vec![0]).unwrap();
    let (g, phi_star) = setup(&chart, 6, false, 0.3);
    let p = manufactured_problem(g, &phi_star, Normalization::SupZero).unwrap();
    let s = solve_elliptic(&p, "gill-flow", &SolveOptions { tolerance: 1e-9, ..Default::default() }).unwrap();
    assert_eq!(s.method, "gill-flow");
    assert!(sup_diff(&s.phi, &Normalization::SupZero.apply(&phi_star)) < 1e-7);
    assert!(s.phi.max().abs() < 1e-15);
}

#[test]
fn kahler_constant_matches_volume_identity() {
    for (n, res) in [(1usize, 64usize), (2, 32)] {
        let axes: Vec<usize> = (0..n).map(|k| 2 * k).collect();
        let chart = TorusChart::uniform(n, res, 1.0, axes).unwrap();
        let (g, _) = setup(&chart, 11, true, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let f = random_potential(&chart, &mut rng, 3, 1.0, 2).map(|v| 2.0 * v);
        let p = EllipticProblem::new(g.clone(), f.clone(), Normalization::SupZero).unwrap();
        let s = solve_elliptic(&p, "newton-continuation", &SolveOptions::default()).unwrap();
        let b = integral_b(&g, &f);
        assert!((s.b - b).abs() < 1e-8, "n = {n}: {} vs {b}", s.b);
        assert!((p.kahler_b() - b).abs() < 1e-14);
    }
}

#[test]
fn invalid_problems_are_rejected() {
    let chart = TorusChart::uniform(1, 16, 1.0, vec![0]).unwrap();
    let neg = MetricField::identity(chart.clone()).scale(-1.0);
    assert!(matches!(
        EllipticProblem::new(neg, ScalarField::zeros(chart.clone()), Normalization::MeanZero),
        Err(EllipticError::InvalidProblem(_))
    ));
    // i ddbar phi* = -2 omega somewhere: not admissible.
    let phi = ScalarField::from_fn(chart.clone(), |x| (2.0 * std::f64::consts::PI * x[0]).cos()).unwrap();
    assert!(manufactured_problem(MetricField::identity(chart), &phi, Normalization::MeanZero).is_err());
}

#[test]
fn estimates_of_trivial_solution() {
    let chart = TorusChart::uniform(2, 16, 1.0, vec![0, 2]).unwrap();
    let p = EllipticProblem::new(MetricField::identity(chart.clone()), ScalarField::zeros(chart), Normalization::MeanZero)
        .unwrap();
    let s = solve_elliptic(&p, "newton-continuation", &SolveOptions::default()).unwrap();
    let rep = certify_estimates(&p, &s, &[0.0, 1.0]).unwrap();
    assert_eq!(rep.oscillation, 0.0);
    for (_, c) in &rep.constants {
        assert!((c - 2.0).abs() < 1e-12);
    }
}

#[test]
fn refinement_stable_exponent_is_smallest_agreeing_a() {
    let mk = |cs: &[f64]| EstimateReport {
        oscillation: 1.0,
        max_trace: cs[0],
        constants: [0.0, 1.0, 2.0].iter().copied().zip(cs.iter().copied()).collect(),
    };
    let coarse = mk(&[3.0, 2.0, 1.0]);
    let fine = mk(&[4.0, 2.1, 1.05]);
    assert_eq!(refinement_stable_a(&coarse, &fine, 0.1), Some(1.0));
    assert_eq!(refinement_stable_a(&coarse, &mk(&[9.0, 9.0, 9.0]), 0.1), None);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn newton_inverts_manufactured_problems(seed in 0u64..100_000, amp in 0.05f64..0.4, sup in any::<bool>()) {
        let chart = TorusChart::uniform(2, 16, 1.0, vec![0, 2]).unwrap();
        let (g, phi_star) = setup(&chart, seed, false, amp);
        let norm = if sup { Normalization::SupZero } else { Normalization::MeanZero };
        let p = manufactured_problem(g, &phi_star, norm).unwrap();
        let s = solve_elliptic(&p, "newton-continuation", &SolveOptions::default()).unwrap();
        prop_assert!(sup_diff(&s.phi, &norm.apply(&phi_star)) < 1e-8);
    }

    #[test]
    fn adding_a_constant_to_f_shifts_b(seed in 0u64..100_000, c in -2.0f64..2.0) {
        let chart = TorusChart::uniform(1, 32, 1.0, vec![0]).unwrap();
        let (g, phi_star) = setup(&chart, seed, false, 0.2);
        let p = manufactured_problem(g, &phi_star, Normalization::MeanZero).unwrap();
        let shifted = EllipticProblem::new(p.omega.clone(), p.f.map(|v| v + c), Normalization::MeanZero).unwrap();
        let a = solve_elliptic(&p, "newton-continuation", &SolveOptions::default()).unwrap();
        let b = solve_elliptic(&shifted, "newton-continuation", &SolveOptions::default()).unwrap();
        prop_assert!((a.b - c - b.b).abs() < 1e-9);
        prop_assert!(sup_diff(&a.phi, &b.phi) < 1e-9);
    }
}
