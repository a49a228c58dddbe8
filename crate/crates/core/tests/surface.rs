use std::f64::consts::PI;
use std::path::PathBuf;

use proptest::prelude::*;

use crflab_core::model::HopfQuadrature;
use crflab_core::surface::{
    classify, divisor_volume, hopf_surface_data, maximal_time, smallest_positive_root, volume_polynomial, Binding,
    CollapseCase, Divisor, Kodaira, SurfaceClassData, SurfaceError, SurfaceFile, SurfaceFlags,
};

fn fixture(name: &str) -> SurfaceFile {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/surfaces").join(name);
    SurfaceFile::parse(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn flags(minimal: bool, kodaira: Kodaira, b2: Option<u32>, kahler: bool) -> SurfaceFlags {
    SurfaceFlags { minimal, kodaira, class_vii_b2: b2, kahler }
}

fn minus_one_curve(v: f64) -> Divisor {
    Divisor { name: "E".into(), d_self: -1, d_dot_k: -1, omega0_vol: v }
}

#[test]
fn golden_fixtures() {
    let v_hopf = 16.0 * PI * PI * 2f64.ln();
    // (file, T, case, binding)
    let cases: [(&str, f64, CollapseCase, Binding); 6] = [
        ("hopf.toml", 0.5, CollapseCase::B, Binding::VolumeCollapse),
        ("inoue.toml", f64::INFINITY, CollapseCase::A, Binding::None),
        ("class_vii_b2_3.toml", f64::NAN, CollapseCase::B, Binding::VolumeCollapse),
        ("properly_elliptic.toml", f64::INFINITY, CollapseCase::A, Binding::None),
        ("ruled_p1xp1.toml", 0.5, CollapseCase::B, Binding::VolumeCollapse),
        ("blowup_minus_one.toml", 0.5, CollapseCase::C, Binding::DivisorCollapse("E".into())),
    ];
    for (name, t, case, binding) in cases {
        let file = fixture(name);
        let r = maximal_time(&file.surface).unwrap();
        assert_eq!(r.case, case, "{name}");
        assert_eq!(r.binding, binding, "{name}");
        if t.is_nan() {
            // V_t = vol0 - 2 t pairing - 4 pi^2 b2 t^2 with b2 = 3.
            let s = &file.surface;
            let a = 12.0 * PI * PI;
            let root = (-2.0 * s.pairing + (4.0 * s.pairing * s.pairing + 4.0 * a * s.vol0).sqrt()) / (2.0 * a);
            assert!((r.t_max - root).abs() < 1e-12, "{name}: {} vs {root}", r.t_max);
            assert!((s.c1sq + a).abs() < 1e-9);
        } else if t.is_infinite() {
            assert!(r.t_max.is_infinite(), "{name}");
        } else {
            assert!((r.t_max - t).abs() < 1e-12, "{name}: {}", r.t_max);
        }
        classify(&file.surface, &r).unwrap();
    }
    let hopf = fixture("hopf.toml").surface;
    assert!((hopf.vol0 - v_hopf).abs() < 1e-9);
    let r = maximal_time(&hopf).unwrap();
    assert!((r.t_max - hopf.vol0 / (2.0 * hopf.pairing)).abs() < 1e-15);
    let report = classify(&hopf, &r).unwrap().to_string();
    assert!(report.contains("class VII, collapsing, not Inoue"), "{report}");
}

#[test]
fn blowup_fixture_collapses_curve_before_volume() {
    let s = fixture("blowup_minus_one.toml").surface;
    let e = &s.divisors[0];
    let t = maximal_time(&s).unwrap().t_max;
    assert!((t - e.omega0_vol / (2.0 * PI)).abs() < 1e-14);
    assert!(volume_polynomial(&s, t) > 0.0);
    assert!(divisor_volume(e, t).abs() < 1e-12);
    let report = classify(&s, &maximal_time(&s).unwrap()).unwrap().to_string();
    assert!(report.contains("(-1)-curve"), "{report}");
}

#[test]
fn divisor_volume_roots() {
    let e = minus_one_curve(3.0);
    assert!(divisor_volume(&e, 3.0 / (2.0 * PI)).abs() < 1e-15);
    let fiber = Divisor { name: "F".into(), d_self: 0, d_dot_k: -2, omega0_vol: 3.0 };
    assert!(divisor_volume(&fiber, 3.0 / (4.0 * PI)).abs() < 1e-15);
    let flat = Divisor { name: "C".into(), d_self: -2, d_dot_k: 0, omega0_vol: 3.0 };
    assert_eq!(divisor_volume(&flat, 100.0), 3.0);
}

#[test]
fn volume_polynomial_values() {
    let s = SurfaceClassData {
        vol0: 5.0,
        pairing: 1.5,
        c1sq: -4.0 * PI * PI * 2.0,
        divisors: Vec::new(),
        flags: flags(true, Kodaira::NegInfinity, Some(2), false),
    };
    assert_eq!(volume_polynomial(&s, 0.0), 5.0);
    let t = 0.3;
    assert!((volume_polynomial(&s, t) - (5.0 - 2.0 * t * 1.5 - 8.0 * PI * PI * t * t)).abs() < 1e-14);
}

#[test]
fn quadratic_roots() {
    assert_eq!(smallest_positive_root(1.0, -2.0, 0.0), Some(0.5));
    assert_eq!(smallest_positive_root(1.0, 1.0, 0.0), None);
    assert_eq!(smallest_positive_root(1.0, 0.0, 1.0), None);
    let r = smallest_positive_root(2.0, -3.0, 1.0).unwrap(); // roots 1, 2
    assert!((r - 1.0).abs() < 1e-15);
    let r = smallest_positive_root(1.0, -2.0, 1.0).unwrap(); // double root at 1
    assert!((r - 1.0).abs() < 1e-7);
}

#[test]
fn inconsistent_data_is_rejected() {
    let mut s = fixture("hopf.toml").surface;
    s.vol0 = -1.0;
    assert!(matches!(maximal_time(&s), Err(SurfaceError::InconsistentData(_))));
    let mut s = fixture("blowup_minus_one.toml").surface;
    s.divisors[0].omega0_vol = 0.0;
    assert!(matches!(maximal_time(&s), Err(SurfaceError::InconsistentData(_))));
    assert!(matches!(SurfaceFile::parse("[surface]\nvol0 = 1.0\n"), Err(SurfaceError::Parse(_))));
}

#[test]
fn flag_contradictions() {
    // Minimal with a (-1)-curve.
    let mut s = fixture("blowup_minus_one.toml").surface;
    s.flags.minimal = true;
    let r = maximal_time(&s).unwrap();
    assert!(matches!(classify(&s, &r), Err(SurfaceError::FlagContradiction(_))));
    // Finite-time volume collapse with nonnegative Kodaira dimension.
    let mut s = fixture("hopf.toml").surface;
    s.flags.kodaira = Kodaira::One;
    s.flags.class_vii_b2 = None;
    let r = maximal_time(&s).unwrap();
    assert!(matches!(classify(&s, &r), Err(SurfaceError::FlagContradiction(_))));
    // Long-time existence on a non-minimal surface.
    let mut s = fixture("inoue.toml").surface;
    s.flags.minimal = false;
    let r = maximal_time(&s).unwrap();
    assert!(matches!(classify(&s, &r), Err(SurfaceError::FlagContradiction(_))));
    // Kähler class VII.
    let mut s = fixture("hopf.toml").surface;
    s.flags.kahler = true;
    let r = maximal_time(&s).unwrap();
    assert!(matches!(classify(&s, &r), Err(SurfaceError::FlagContradiction(_))));
}

#[test]
fn hopf_quadrature_matches_one_over_n() {
    let data = hopf_surface_data(HopfQuadrature { modulus: 2.0, order: 12 }).unwrap();
    let r = maximal_time(&data).unwrap();
    assert!((r.t_max - 0.5).abs() < 1e-3);
    assert_eq!(r.case, CollapseCase::B);
    let data3 = hopf_surface_data(HopfQuadrature { modulus: 3.0, order: 12 }).unwrap();
    assert!((maximal_time(&data3).unwrap().t_max - 0.5).abs() < 1e-3);
}

fn arb_data() -> impl Strategy<Value = SurfaceClassData> {
    (0.1f64..100.0, -50.0f64..50.0, -200.0f64..200.0, prop::collection::vec((0.1f64..20.0, 1i64..3), 0..3)).prop_map(
        |(vol0, pairing, c1sq, divs)| SurfaceClassData {
            vol0,
            pairing,
            c1sq,
            divisors: divs
                .into_iter()
                .enumerate()
                .map(|(k, (v, m))| Divisor { name: format!("D{k}"), d_self: -m, d_dot_k: m - 2, omega0_vol: v })
                .collect(),
            flags: flags(false, Kodaira::NegInfinity, None, false),
        },
    )
}

fn close(a: f64, b: f64) -> bool {
    (a.is_infinite() && b.is_infinite()) || (a - b).abs() <= 1e-9 * a.abs().max(1.0)
}

proptest! {
    #[test]
    fn maximal_time_is_scale_equivariant(data in arb_data(), lambda in 0.05f64..20.0) {
        let t = maximal_time(&data).unwrap();
        let ts = maximal_time(&data.scaled(lambda)).unwrap();
        prop_assert!(close(ts.t_max, lambda * t.t_max), "{} vs {}", ts.t_max, lambda * t.t_max);
        prop_assert_eq!(ts.case, t.case);
    }

    #[test]
    fn maximal_time_is_monotone_in_initial_volumes(data in arb_data(), dv in 0.0f64..50.0, dd in 0.0f64..5.0) {
        let t = maximal_time(&data).unwrap().t_max;
        let mut bigger = data.clone();
        bigger.vol0 += dv;
        for d in &mut bigger.divisors {
            d.omega0_vol += dd;
        }
        let tb = maximal_time(&bigger).unwrap().t_max;
        prop_assert!(tb >= t * (1.0 - 1e-12), "{tb} < {t}");
    }

    #[test]
    fn volume_and_divisors_are_positive_before_t(data in arb_data(), frac in 0.0f64..0.999) {
        let r = maximal_time(&data).unwrap();
        let t = if r.t_max.is_finite() { frac * r.t_max } else { 1e3 * frac };
        prop_assert!(volume_polynomial(&data, t) > 0.0);
        for d in &data.divisors {
            prop_assert!(divisor_volume(d, t) > 0.0);
        }
    }
}
