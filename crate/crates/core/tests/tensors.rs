use std::f64::consts::PI;

use num_complex::Complex64 as C;
use proptest::prelude::*;

use crflab_core::geometry::{MetricField, ScalarField, TorusChart};
use crflab_core::tensors::{
    chern_ricci, closedness_defect, suite, verify_bianchi_vanishing, verify_schwarz_identity, ChernGeometry,
    IdentityContext, IdentityReport,
};

fn conformal(chart: &crflab_core::geometry::ChartRef, amp: f64) -> (MetricField, ScalarField) {
    let u = ScalarField::from_fn(chart.clone(), |x| amp * (2.0 * PI * x[0]).sin()).unwrap();
    let g = MetricField::identity(chart.clone()).scale_by(&u.map(f64::exp)).unwrap();
    (g, u)
}

#[test]
fn flat_metric_has_no_curvature_or_torsion() {
    let chart = TorusChart::uniform(2, 16, 1.0, vec![0, 2]).unwrap();
    let g = MetricField::identity(chart);
    let geo = ChernGeometry::new(&g).unwrap();
    assert!(geo.torsion.sup_abs() < 1e-14);
    assert!(geo.curvature.sup_abs() < 1e-14);
    assert!(chern_ricci(&g).unwrap().sup_norm() < 1e-14);
}

#[test]
fn conformal_ricci_matches_closed_form() {
    // g = e^u I on C^2 with u = a sin(2 pi x1): log det = 2u, so
    // Ric_{1 1bar} = -2 d1 dbar1 u = 2 pi^2 a sin(2 pi x1) and the rest vanish.
    let chart = TorusChart::uniform(2, 32, 1.0, vec![0, 2]).unwrap();
    let a = 0.2;
    let (g, _) = conformal(&chart, a);
    let ric = chern_ricci(&g).unwrap();
    let alt = ChernGeometry::new(&g).unwrap().ricci_from_curvature();
    for node in 0..chart.node_count() {
        let x = chart.coordinates(node);
        let e = 2.0 * PI * PI * a * (2.0 * PI * x[0]).sin();
        let m = ric.node(node);
        assert!((m[0] - C::new(e, 0.0)).norm() < 1e-10, "{:?} vs {e}", m[0]);
        assert!(m[1].norm() < 1e-10 && m[2].norm() < 1e-10 && m[3].norm() < 1e-10);
        for (p, q) in m.iter().zip(alt.node(node)) {
            assert!((p - q).norm() < 1e-9);
        }
    }
}

#[test]
fn conformal_metric_in_two_variables_has_torsion() {
    // d(e^u omega_flat) = e^u du ^ omega_flat is nonzero when n = 2.
    let chart = TorusChart::uniform(2, 16, 1.0, vec![0, 2]).unwrap();
    let (g, _) = conformal(&chart, 0.2);
    assert!(ChernGeometry::new(&g).unwrap().torsion.sup_abs() > 1e-2);
    let chart1 = TorusChart::uniform(1, 16, 1.0, vec![0]).unwrap();
    let (g1, _) = conformal(&chart1, 0.2);
    assert!(ChernGeometry::new(&g1).unwrap().torsion.sup_abs() < 1e-12);
}

#[test]
fn suite_passes_at_64_and_names_are_stable() {
    let chart = TorusChart::uniform(2, 64, 1.0, vec![0, 2]).unwrap();
    let ctx = IdentityContext::random(&chart, 7).unwrap();
    let reports = suite::run_all(&ctx).unwrap();
    let names: Vec<_> = reports.iter().map(|r| r.identity.as_str()).collect();
    assert_eq!(
        names,
        [
            "bianchi-vanishing",
            "commutation",
            "curvature-conjugation",
            "kahler-torsion",
            "metric-compatibility",
            "ricci-closed",
            "ricci-trace",
            "schwarz",
            "trace-evolution",
            "trace-evolution-bounds"
        ]
    );
    for r in &reports {
        assert!(r.passed, "{r}");
    }
    assert!(suite::registry().get("no-such-check").is_err());
}

#[test]
fn report_line_round_trips() {
    let r = IdentityReport::new("schwarz", 3.25e-9, "64x64".into(), 1e-7);
    let back = IdentityReport::parse_line(&r.to_string()).unwrap();
    assert_eq!(back.identity, "schwarz");
    assert!(back.passed);
    assert!((back.residual - 3.25e-9).abs() < 1e-15);
    let bad = IdentityReport::new("schwarz", 2e-7, "64x64".into(), 1e-7);
    assert!(!bad.passed);
}

#[test]
fn schwarz_identity_with_equal_metrics() {
    // u = 1: both sides vanish identically.
    let chart = TorusChart::uniform(2, 32, 1.0, vec![0, 2]).unwrap();
    let ctx = IdentityContext::random(&chart, 1).unwrap();
    let r = verify_schwarz_identity(&ctx.g0, &ctx.g0).unwrap();
    assert!(r.residual < 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn ricci_form_is_closed_and_bianchi_vanishes(seed in 0u64..10_000) {
        let chart = TorusChart::uniform(2, 32, 1.0, vec![0, 2]).unwrap();
        let ctx = IdentityContext::random(&chart, seed).unwrap();
        prop_assert!(closedness_defect(&chern_ricci(&ctx.g0).unwrap()) < 1e-9);
        prop_assert!(verify_bianchi_vanishing(&ctx.ghat).unwrap().residual < 1e-7);
        prop_assert!(ChernGeometry::new(&ctx.kahler).unwrap().torsion.sup_abs() < 1e-10);
    }

    #[test]
    fn ricci_is_invariant_under_constant_scaling(seed in 0u64..10_000, lambda in 0.2f64..5.0) {
        let chart = TorusChart::uniform(2, 16, 1.0, vec![0, 2]).unwrap();
        let ctx = IdentityContext::random(&chart, seed).unwrap();
        let a = chern_ricci(&ctx.g0).unwrap();
        let b = chern_ricci(&ctx.g0.scale(lambda)).unwrap();
        prop_assert!(a.sub(&b).unwrap().sup_norm() < 1e-9 * (1.0 + a.sup_norm()));
    }
}
