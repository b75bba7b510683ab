use atlas_core::orbit::Target;
use atlas_core::parabolic::*;
use atlas_core::visibility::*;
use atlas_core::{AtlasError, Family, Parameter, C64};
use std::f64::consts::FRAC_PI_3;

const A2: C64 = C64::new(0.0, 4.63343045134138);

#[test]
fn a2_triple_is_three_coroots_with_the_symmetric_one_invisible() {
    let p = Parameter::newton(A2);
    let t = half_return_boundary_points(&p).unwrap();
    assert_eq!(t.period, 4);
    assert_eq!(t.points.len(), 3);
    assert_eq!(t.tags, vec![RootTag::CoRoot; 3]);
    let s = t.symmetric_index.unwrap();
    assert!(t.points[s].re.abs() < 1e-12);
    assert!((t.points[s].im - 2.002319027461102).abs() < 1e-9);
    for r in &t.residuals {
        assert!(*r < 1e-12);
    }
    // the other two are mirror images under z -> -conj z
    let others: Vec<C64> = (0..3).filter(|i| *i != s).map(|i| t.points[i]).collect();
    assert!((others[0] + others[1].conj()).norm() < 1e-10);

    let verdicts: Vec<VisibilityVerdict> = t.points.iter().map(|z| coroot_visibility(&p, *z).unwrap()).collect();
    assert!(verdicts[s].is_invisible());
    let mut witnesses = Vec::new();
    for (i, v) in verdicts.iter().enumerate() {
        if i != s {
            match v.state {
                VisibilityState::Visible { witness } => witnesses.push(witness),
                ref o => panic!("expected visible, got {o:?}"),
            }
        }
    }
    witnesses.sort_by_key(|w| w.label());
    assert_eq!(witnesses, vec![Target::MinusOne, Target::One]);
}

#[test]
fn antipodal_tongue_triple_in_closed_form() {
    let p = Parameter::antipodal(C64::new(0.0, 3.0));
    let t = half_return_boundary_points(&p).unwrap();
    assert_eq!(t.period, 2);
    let want = [C64::new(1.0, 0.0), C64::new(0.0, 1.0 + 2f64.sqrt()), C64::new(-1.0, 0.0)];
    for w in want {
        let i = t.points.iter().position(|z| (z - w).norm() < 1e-12).unwrap_or_else(|| panic!("{w} not in {:?}", t.points));
        let tag = if w.im > 0.0 { RootTag::CoRoot } else { RootTag::Root };
        assert_eq!(t.tags[i], tag);
    }
    let coroot = coroot_visibility(&p, C64::new(0.0, 1.0 + 2f64.sqrt())).unwrap();
    assert!(coroot.is_invisible());
    assert!(coroot.scales.iter().all(|s| s.present.is_empty()));
    let root = coroot_visibility(&p, C64::new(1.0, 0.0)).unwrap();
    assert_eq!(root.state, VisibilityState::Visible { witness: Target::Zero });
}

#[test]
fn probe_radii_are_halving_down_to_the_floor() {
    let r = probe_radii(1e-6);
    assert_eq!(r[0], 1e-2);
    assert_eq!(*r.last().unwrap(), 1e-6);
    for w in r.windows(2) {
        assert!(w[1] < w[0]);
    }
}

#[test]
fn raising_the_floor_cannot_turn_invisible_into_visible() {
    let p = Parameter::newton(A2);
    let z = C64::new(0.0, 2.002319027461102);
    for floor in [1e-4, 1e-5] {
        let v = coroot_visibility_with(&p, z, floor, 32).unwrap();
        assert!(!v.is_visible(), "{floor}: {:?}", v.state);
    }
}

#[test]
fn triple_needs_an_attracting_self_symmetric_cycle() {
    assert!(matches!(half_return_boundary_points(&Parameter::newton(C64::new(2.0, 0.0))), Err(AtlasError::OutsideDomain(_))));
    assert!(half_return_boundary_points(&Parameter::newton(C64::new(0.0, 2.0))).is_err());
}

#[test]
fn cylinder_is_glide_symmetric_with_positive_window() {
    let d = find_boundary_parabolic(Parameter::newton(A2), C64::from_polar(1.0, FRAC_PI_3), 4).unwrap();
    let c = cylinder_projection(&d, 32, 32, 3.0).unwrap();
    // u_h is the top of the boundary of the characteristic region reaching the upper end
    assert!(c.u_h > 0.0 && c.u_h < c.h_max);
    assert!(c.l_h <= c.u_h);
    assert!((c.beta_re - 0.5).abs() < 1e-6);
    assert!(c.glide_mismatch() < 0.02, "{}", c.glide_mismatch());
    assert!(c.fraction(CylinderClass::Characteristic) > 0.0);
    assert!(c.fraction(CylinderClass::Undecided) < 0.1);
}

#[test]
fn scan_beside_the_invisible_arc_never_touches_the_principal_component() {
    let p = Parameter::newton(A2);
    let t = half_return_boundary_points(&p).unwrap();
    let arcs = boundary_arcs(&p, 4, &t);
    let s = t.symmetric_index.unwrap();
    let d = arcs[s].clone().expect("an arc lands on the symmetric co-root");
    assert!(d.param.value.re.abs() < 1e-9);
    let tr = trace_arc(&d, &[-0.1, 0.0, 0.1], &TraceSettings::default()).unwrap();
    let scan = arc_neighborhood_scan(&tr.samples, 4, Family::NewtonQuartic, 1e-2, 64).unwrap();
    assert!(!scan.principal_contact);
    assert!(scan.capture_count > 0);
}
