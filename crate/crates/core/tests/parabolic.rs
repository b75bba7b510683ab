use atlas_core::parabolic::*;
use atlas_core::{AtlasError, Parameter, C64};
use std::f64::consts::FRAC_PI_3;
use std::sync::OnceLock;

const A2: C64 = C64::new(0.0, 4.63343045134138);

fn datum() -> &'static ParabolicDatum {
    static D: OnceLock<ParabolicDatum> = OnceLock::new();
    D.get_or_init(|| find_boundary_parabolic(Parameter::newton(A2), C64::from_polar(1.0, FRAC_PI_3), 4).unwrap())
}

#[test]
fn boundary_parabolic_on_the_sixty_degree_ray() {
    let d = datum();
    assert_eq!(d.period, 4);
    assert_eq!(d.petal_kind, PetalKind::Simple);
    assert!((d.param.value - C64::new(0.011167142424, 4.652772509395)).norm() < 1e-9, "{}", d.param.value);
    assert!((d.multiplier - 1.0).norm() < 1e-10);
    assert!(d.local_coeffs.a.norm() > CUSP_TOL);
    // the return map is the square of an antiholomorphic map, so b is real
    assert!(d.local_coeffs.b.im.abs() < 1e-9);
    assert_eq!(d.cycle.len(), 4);
    let k = d.kernel();
    assert!((k.iterate(d.parabolic_point, 4) - d.parabolic_point).norm() < 1e-10);
}

#[test]
fn fatou_coordinate_conjugates_the_return_map_to_a_translation() {
    let coord = AttractingCoordinate::new(datum(), FatouSettings::default()).unwrap();
    assert!((coord.norm.beta.re - 0.5).abs() < 1e-8, "{}", coord.norm.beta);
    for p in coord.petal_probes(20) {
        let r = coord.psi(coord.return_map(p)).unwrap() - coord.psi(p).unwrap() - 1.0;
        assert!(r.norm() < 1e-7, "{r}");
    }
}

#[test]
fn ecalle_height_is_odd_under_the_critical_symmetry() {
    let e = critical_ecalle_height(datum()).unwrap();
    assert!((e.h - 0.2173372).abs() < 1e-6, "{}", e.h);
    assert!((e.h + e.h_conjugate).abs() < 1e-7);
    let e2 = critical_ecalle_height_with(datum(), FatouSettings::default().doubled()).unwrap();
    assert!((e.h - e2.h).abs() < 1e-7);
}

#[test]
fn trace_reaches_requested_heights_with_consistent_samples() {
    let tr = trace_arc(datum(), &[-0.5, 0.0, 0.5], &TraceSettings::default()).unwrap();
    assert!(tr.unreached.is_empty());
    assert_eq!(tr.samples.len(), 3);
    for (s, want) in tr.samples.iter().zip([-0.5, 0.0, 0.5]) {
        assert!((s.h - want).abs() < 1e-8, "{} vs {want}", s.h);
        assert!(s.multiplier_residual < 1e-10);
        assert_eq!(s.petal_kind, PetalKind::Simple);
        // the sample is a parabolic parameter in its own right
        let d = ParabolicDatum::at(Parameter::newton(s.param), 4, s.parabolic_point);
        let h = critical_ecalle_height(&d).unwrap().h;
        assert!((h - s.h).abs() < 1e-7);
    }
    assert!(!tr.cusp_reached());
    // heights grow monotonically along the path
    assert!(tr.path.len() >= 3);
}

#[test]
fn tracing_to_infinity_ends_at_cusps() {
    let tr = trace_arc(datum(), &[f64::NEG_INFINITY, f64::INFINITY], &TraceSettings::default()).unwrap();
    assert!(tr.cusp_low && tr.cusp_high, "{:?}", tr.unreached);
}

#[test]
fn phase_decreases_toward_the_arc_and_heights_agree() {
    let d = datum();
    let nu = arc_normal(d).unwrap();
    assert!((nu.norm() - 1.0).abs() < 1e-12);
    let mut last = f64::INFINITY;
    let mut last_k = 0;
    for t in [1e-3, 1e-4, 1e-5] {
        let s = repelling_fatou_and_phase(d.param.value + t * nu, d).unwrap();
        assert!(s.lifted_phase < last);
        assert!(s.escape_time > last_k);
        assert!((s.transit_height - s.incoming_height).abs() < 1e-7);
        last = s.lifted_phase;
        last_k = s.escape_time;
    }
}

#[test]
fn inside_the_component_the_orbit_does_not_escape() {
    let d = datum();
    let nu = arc_normal(d).unwrap();
    assert!(matches!(repelling_fatou_and_phase(d.param.value - 1e-3 * nu, d), Err(AtlasError::NotEscaping)));
}

#[test]
fn antipodal_tongue_boundary() {
    let d = find_boundary_parabolic(Parameter::antipodal(C64::new(0.0, 3.0)), C64::from_polar(1.0, 0.3), 2).unwrap();
    assert!((d.multiplier - 1.0).norm() < 1e-10);
    let e = critical_ecalle_height(&d).unwrap();
    assert!((e.h + e.h_conjugate).abs() < 1e-7);
}
