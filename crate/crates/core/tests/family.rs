use atlas_core::family::*;
use atlas_core::AtlasError;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Direct z - f/f' with f = (z^2 - 1)(z - a)(z - conj a).
fn newton_direct(a: C64, z: C64) -> C64 {
    let f = (z * z - 1.0) * (z - a) * (z - a.conj());
    let fp = 2.0 * z * (z - a) * (z - a.conj()) + (z * z - 1.0) * ((z - a) + (z - a.conj()));
    z - f / fp
}

#[test]
fn newton_at_two_i_sends_two_to_sixteen_elevenths() {
    let p = Parameter::newton(c(0.0, 2.0));
    let (w, _) = evaluate(&p, SpherePoint::finite(c(2.0, 0.0))).unwrap();
    assert!((w.to_c64() - c(16.0 / 11.0, 0.0)).norm() < 1e-14);
    let (w, dw) = evaluate(&p, SpherePoint::finite(c(1.0, 0.0))).unwrap();
    assert!((w.to_c64() - c(1.0, 0.0)).norm() < 1e-15);
    assert!(dw.norm() < 1e-14);
}

#[test]
fn infinity_is_repelling_with_multiplier_four_thirds() {
    for a in [c(0.0, 2.0), c(1.0, 2.0), c(-0.7, 3.1)] {
        let (w, dw) = evaluate(&Parameter::newton(a), SpherePoint::INFINITY).unwrap();
        assert!(w.is_infinity());
        // N(z) ~ 3z/4 at infinity, so w -> 1/N(1/w) ~ 4w/3
        assert!((dw - 4.0 / 3.0).norm() < 1e-10, "{dw}");
    }
}

#[test]
fn antipodal_pole_at_minus_one_over_conj_q() {
    let (w, _) = evaluate(&Parameter::antipodal(c(1.0, 0.0)), SpherePoint::finite(c(-1.0, 0.0))).unwrap();
    assert!(w.is_infinity());
    let (w, _) = evaluate(&Parameter::antipodal(c(0.3, 1.7)), SpherePoint::INFINITY).unwrap();
    assert!(w.is_infinity());
    let (w, _) = evaluate(&Parameter::antipodal(c(0.3, 1.7)), SpherePoint::finite(c(0.0, 0.0))).unwrap();
    assert_eq!(w.to_c64(), c(0.0, 0.0));
}

#[test]
fn free_critical_points_match_closed_forms() {
    let cp = free_critical_points(&Parameter::newton(c(0.0, 2.0))).unwrap();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    assert!((cp.c_plus - c(0.0, s)).norm() < 1e-14);
    assert!((cp.c_minus - c(0.0, -s)).norm() < 1e-14);

    let cp = free_critical_points(&Parameter::antipodal(c(1.0, 0.0))).unwrap();
    let r5 = 5f64.sqrt();
    assert!((cp.c_plus - c((r5 - 1.0) / 2.0, 0.0)).norm() < 1e-14);
    assert!((cp.c_minus - c(-(r5 + 1.0) / 2.0, 0.0)).norm() < 1e-14);
}

#[test]
fn critical_points_are_critical() {
    let params = [
        Parameter::newton(c(0.0, 2.0)),
        Parameter::newton(c(1.0, 2.0)),
        Parameter::newton(c(-2.5, 4.0)),
        Parameter::antipodal(c(1.0, 0.0)),
        Parameter::antipodal(c(0.0, 3.0)),
        Parameter::antipodal(c(-0.4, 0.01)),
    ];
    for p in params {
        let kern = MapKernel::new(p);
        let cp = free_critical_points(&p).unwrap();
        for z in [cp.c_plus, cp.c_minus] {
            let (_, d) = kern.map_d(z);
            assert!(d.norm() < ALGEBRAIC_TOL, "{p:?} {z} {d}");
        }
        if p.family == Family::AntipodalCubic {
            assert!((cp.c_minus - involution_c(p.family, cp.c_plus)).norm() < 1e-12);
        }
    }
}

#[test]
fn region_examples() {
    let m = region_membership(c(0.0, 2.0));
    assert_eq!(m.region, Region::InU);
    assert!(m.on_symmetry_locus);
    assert_eq!(region_membership(c(2.0, 0.0)).region, Region::Outside);
    let m = region_membership(c(1.0, 2.0));
    assert_eq!(m.region, Region::InU);
    assert!(!m.on_symmetry_locus);
    assert_eq!(region_membership(c(1.0, -2.0)).region, Region::InConjugateU);
    // the boundary itself is excluded
    assert_eq!(region_membership(c(0.0, 1.0)).region, Region::Outside);
}

#[test]
fn outside_parameters_have_no_newton_critical_points() {
    assert!(matches!(free_critical_points(&Parameter::newton(c(2.0, 0.0))), Err(AtlasError::OutsideDomain(_))));
    assert!(matches!(free_critical_points(&Parameter::antipodal(c(0.0, 0.0))), Err(AtlasError::DegenerateParameter(_))));
}

#[test]
fn discriminant_sign_tracks_region() {
    // conjugate free criticals exactly when the discriminant is negative
    for i in 0..41 {
        for j in 0..41 {
            let a = c(-4.0 + 0.2 * i as f64, -4.0 + 0.2 * j as f64 + 0.013);
            let disc = 9.0 * (a * a + a.conj() * a.conj()) - 6.0 * a.norm_sqr() + 24.0;
            let outside = region_membership(a).region == Region::Outside;
            assert_eq!(disc.re < 0.0, !outside, "a = {a}");
        }
    }
}

#[test]
fn pole_examples() {
    let ps = newton_poles(c(0.0, 2.0)).unwrap();
    assert!(ps.p_real.abs() < 1e-14);
    assert!((ps.p_pair - c(0.0, 1.5f64.sqrt())).norm() < 1e-12);
    let ps = newton_poles(c(1.0, 2.0)).unwrap();
    assert!(ps.p_real > -1.0 && ps.p_real < 0.0);
    assert!(newton_fprime(c(1.0, 2.0), c(ps.p_real, 0.0)).0.norm() < 1e-12);
}

#[test]
fn involution_examples() {
    let p = Parameter::newton(c(0.0, 2.0));
    assert_eq!(involution(&p, SpherePoint::finite(c(2.0, 1.0))).to_c64(), c(2.0, -1.0));
    let q = Parameter::antipodal(c(0.0, 3.0));
    assert!((involution(&q, SpherePoint::finite(c(0.0, 1.0))).to_c64() - c(0.0, -1.0)).norm() < 1e-15);
    assert!(involution(&q, SpherePoint::finite(c(0.0, 0.0))).is_infinity());
    assert_eq!(involution(&q, SpherePoint::INFINITY).to_c64(), c(0.0, 0.0));
}

#[test]
fn eta_has_no_fixed_points() {
    let mut rng = StdRng::seed_from_u64(11);
    for _ in 0..10_000 {
        let z = c(rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0));
        let w = involution_c(Family::AntipodalCubic, z);
        // |eta(z) - z| = |z|^-1 (1 + |z|^2) >= 2
        assert!((w - z).norm() >= 2.0 - 1e-12);
    }
}

#[test]
fn parse_and_format_complex_round_trip() {
    assert_eq!(parse_complex("1.5,-2").unwrap(), c(1.5, -2.0));
    assert_eq!(parse_complex(&format_complex(c(0.1, 4.63343045134138))).unwrap(), c(0.1, 4.63343045134138));
    for bad in ["abc", "1", "1,x", "nan,0", ""] {
        assert!(parse_complex(bad).is_err(), "{bad}");
    }
}

fn in_u() -> impl Strategy<Value = C64> {
    (-3.0f64..3.0, 0.0f64..4.0).prop_map(|(x, t)| {
        let floor = ((x * x + 2.0) / 2.0).sqrt();
        c(x, floor + 0.05 + t)
    })
}

fn finite_z() -> impl Strategy<Value = C64> {
    (-5.0f64..5.0, -5.0f64..5.0).prop_map(|(x, y)| c(x, y))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn newton_commutes_with_conjugation(a in in_u(), z in finite_z()) {
        let k = MapKernel::new(Parameter::newton(a));
        let lhs = k.map(z.conj());
        let rhs = k.map(z).conj();
        prop_assume!(lhs.norm() < 1e6);
        prop_assert!((lhs - rhs).norm() < 1e-10 * (1.0 + lhs.norm()));
    }

    #[test]
    fn quotient_form_matches_direct_newton_step(a in in_u(), z in finite_z()) {
        let k = MapKernel::new(Parameter::newton(a));
        let (_, d) = newton_fprime(a, z);
        prop_assume!(newton_fprime(a, z).0.norm() > 1e-3 && d.is_finite());
        let q = k.map(z);
        let direct = newton_direct(a, z);
        prop_assert!((q - direct).norm() <= 1e-10 * direct.norm().max(1.0));
    }

    #[test]
    fn newton_is_odd_on_the_symmetry_locus(t in 1.01f64..8.0, z in finite_z()) {
        let k = MapKernel::new(Parameter::newton(c(0.0, t)));
        let w = k.map(z);
        prop_assume!(w.norm() < 1e6);
        prop_assert!((k.map(-z) + w).norm() < 1e-10 * (1.0 + w.norm()));
    }

    #[test]
    fn antipodal_commutes_with_eta(qr in -4.0f64..4.0, qi in -4.0f64..4.0, z in finite_z()) {
        prop_assume!(qr.abs() + qi.abs() > 0.05 && z.norm() > 1e-3);
        let k = MapKernel::new(Parameter::antipodal(c(qr, qi)));
        let lhs = k.map(involution_c(Family::AntipodalCubic, z));
        let rhs = involution_c(Family::AntipodalCubic, k.map(z));
        prop_assume!(lhs.norm() < 1e6 && rhs.norm() < 1e6);
        prop_assert!((lhs - rhs).norm() < 1e-10 * (1.0 + lhs.norm()));
    }

    #[test]
    fn real_pole_is_unique_in_the_interval(a in in_u()) {
        let ps = newton_poles(a).unwrap();
        prop_assert!(ps.p_real > -1.0 && ps.p_real < 1.0);
        prop_assert!(newton_fprime(a, c(1.0, 0.0)).0.re > 0.0);
        prop_assert!(newton_fprime(a, c(-1.0, 0.0)).0.re < 0.0);
        // the other two zeros of f' are a conjugate pair off the real line
        prop_assert!(ps.p_pair.im.abs() > 1e-8);
    }
}
