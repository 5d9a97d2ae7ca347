use approx::assert_relative_eq;
use proptest::prelude::*;
use qilab::density::{
    appendix_identity_check, closed_integrand, default_grid, density_at, density_profile,
    e_ke_closed, e_ke_direct, energy_report, large_arc_term,
};
use qilab::{QuadratureSpec, WellConfig};

// Density at (V₀, a) = (1, 1) from the unfused κ integrand with the
// analytic second derivative, in 60-digit arithmetic.
const T_AT_0: f64 = -0.03235383928082909;
const T_AT_05: f64 = -0.02682498092145334;
const T_AT_09: f64 = -0.008794827160523531;

// (v0, a, E_KE), same arithmetic.
const E_KE_GOLDEN: [(f64, f64, f64); 5] = [
    (1.0, 1.0, -0.047_060_371_244_802_77),
    (0.1, 1.0, -0.001_737_610_620_984_743),
    (3.0, 0.7, -0.10932493509418013),
    (10.0, 0.1, -0.017_376_106_209_847_43),
    (0.1, 10.0, -0.068_776_926_934_028_01),
];

fn quad(a: f64) -> QuadratureSpec {
    QuadratureSpec::for_half_width(a).with_rel_tol(1e-10)
}

#[test]
fn interior_density_matches_high_precision_values() {
    let c = WellConfig::new(1.0, 1.0).unwrap();
    for (x, want) in [(0.0, T_AT_0), (0.5, T_AT_05), (-0.9, T_AT_09)] {
        let got = density_at(&c, x, &quad(1.0)).unwrap();
        assert_relative_eq!(got, want, max_relative = 1e-8);
    }
}

#[test]
fn closed_form_matches_high_precision_values() {
    for (v0, a, want) in E_KE_GOLDEN {
        let c = WellConfig::new(v0, a).unwrap();
        assert_relative_eq!(e_ke_closed(&c, &quad(a)).unwrap(), want, max_relative = 1e-9);
        assert_relative_eq!(e_ke_direct(&c, &quad(a)).unwrap(), want, max_relative = 1e-9);
    }
}

#[test]
fn scales_with_length_units() {
    // E_KE(V₀s², a/s) = s·E_KE(V₀, a)
    let c = WellConfig::new(0.1, 1.0).unwrap();
    let s = WellConfig::new(10.0, 0.1).unwrap();
    let e1 = e_ke_closed(&c, &quad(1.0)).unwrap();
    let e2 = e_ke_closed(&s, &quad(0.1)).unwrap();
    assert_relative_eq!(10.0 * e1, e2, max_relative = 1e-10);
}

#[test]
fn simpson_oracle_agrees_with_closed_form() {
    // plain f64 transcription of the closed integrand, mapped κ = t/(1−t)
    let (v, a) = (2.0f64, 0.8f64);
    let f = |k: f64| {
        let kp = (k * k + v).sqrt();
        let u = 2.0 * a * kp;
        // cosh and sinh divided by e^u/2
        let e = (-2.0 * u).exp();
        let d = 2.0 * kp * k * (1.0 + e) + (k * k + kp * kp) * (1.0 - e);
        v * v * (u * (1.0 + e) - (1.0 - e)) / (kp * kp * d)
    };
    let n = 20000;
    let h = 1.0 / n as f64;
    let mut s = f(0.0);
    for i in 1..n {
        let t = i as f64 * h;
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(t / (1.0 - t)) / ((1.0 - t) * (1.0 - t));
    }
    let oracle = -s * h / 3.0 / (4.0 * std::f64::consts::PI);
    let c = WellConfig::new(v, a).unwrap();
    assert_relative_eq!(e_ke_closed(&c, &quad(a)).unwrap(), oracle, max_relative = 1e-9);
}

#[test]
fn three_routes_agree() {
    let c = WellConfig::new(1.0, 1.0).unwrap();
    let r = energy_report(&c, &QuadratureSpec::for_half_width(1.0)).unwrap();
    assert_relative_eq!(r.e_ke_closed, r.e_ke_direct, max_relative = 1e-6);
    assert_relative_eq!(r.e_ke_closed, r.e_ke_profile, max_relative = 1e-3);
    let json = r.to_json();
    for key in ["v0", "a", "e_ke_closed", "e_ke_direct", "e_ke_profile", "rel_tol", "kappa_max"] {
        assert!(json.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn exterior_density_vanishes() {
    let c = WellConfig::new(1.0, 1.0).unwrap();
    for x in [1.01, 1.5, 3.0, -2.2] {
        assert!(density_at(&c, x, &quad(1.0)).unwrap().abs() < 1e-10);
    }
}

#[test]
fn free_field_is_identically_zero() {
    let c = WellConfig::new(0.0, 1.0).unwrap();
    let p = density_profile(&c, &default_grid(&c, 21, 2.0).unwrap(), &quad(1.0)).unwrap();
    assert!(p.values.iter().all(|v| *v == 0.0));
    assert_eq!(e_ke_closed(&c, &quad(1.0)).unwrap(), 0.0);
}

#[test]
fn coupling_folds_into_height() {
    let a = WellConfig::with_lambda(2.0, 1.0, 0.5).unwrap();
    let b = WellConfig::new(1.0, 1.0).unwrap();
    assert_eq!(
        density_at(&a, 0.3, &quad(1.0)).unwrap(),
        density_at(&b, 0.3, &quad(1.0)).unwrap()
    );
}

#[test]
fn profile_csv_has_header_and_rows() {
    let c = WellConfig::new(1.0, 1.0).unwrap();
    let p = density_profile(&c, &default_grid(&c, 11, 2.0).unwrap(), &quad(1.0)).unwrap();
    let csv = p.to_csv();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x,t00r"));
    assert_eq!(lines.count(), p.grid.len());
}

#[test]
fn grid_excludes_wall_neighbourhood() {
    let c = WellConfig::new(1.0, 1.0).unwrap();
    let g = default_grid(&c, 401, 2.0).unwrap();
    assert!(g.iter().all(|x| (x.abs() - 1.0).abs() >= 1e-3));
    assert!(default_grid(&c, 1, 2.0).is_err());
}

#[test]
fn arc_term_lives_inside_the_barrier() {
    let c = WellConfig::new(1.0, 1.0).unwrap();
    assert_relative_eq!(large_arc_term(&c, 0.2), 1.0 / (4.0 * std::f64::consts::PI));
    assert_eq!(large_arc_term(&c, 1.5), 0.0);
}

#[test]
fn unreachable_tolerance_is_reported() {
    let c = WellConfig::new(1.0, 1.0).unwrap();
    let q = QuadratureSpec::for_half_width(1.0).with_rel_tol(1e-15);
    assert!(density_at(&c, -0.99, &q).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn closed_integrand_is_non_negative(v0 in 0.01f64..50.0, a in 0.01f64..10.0, k in 0.0f64..1e3) {
        let c = WellConfig::new(v0, a).unwrap();
        prop_assert!(closed_integrand(&c, k) >= 0.0);
    }

    #[test]
    fn integrand_identity_holds(v0 in 0.01f64..50.0, a in 0.01f64..10.0, k in 1e-3f64..1e3) {
        let c = WellConfig::new(v0, a).unwrap();
        let scale = closed_integrand(&c, k).abs().max(f64::MIN_POSITIVE);
        prop_assert!(appendix_identity_check(&c, k).unwrap() <= 1e-12 * scale);
    }
}
