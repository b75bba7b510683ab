use atlas_core::family::*;
use atlas_core::orbit::*;
use atlas_core::AtlasError;
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

const A2: C64 = C64::new(0.0, 4.63343045134138);

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[test]
fn a2_is_the_center_of_a_period_four_tricorn_component() {
    let cls = classify_tier(&Parameter::newton(A2), Tier::Standard).unwrap();
    assert_eq!(cls.component_type, ComponentType::Tricorn(4));
    let cyc = cls.cycle().unwrap();
    assert_eq!(cyc.period, 4);
    assert!(cyc.self_symmetric);
    assert!(cyc.multiplier.norm() < 1e-6, "{}", cyc.multiplier);
}

#[test]
fn small_antipodal_parameter_lies_in_the_principal_component() {
    let cls = classify_tier(&Parameter::antipodal(c(0.01, 0.0)), Tier::Standard).unwrap();
    assert_eq!(cls.component_type, ComponentType::Principal);
    assert!(matches!(cls.kind, OrbitKind::FixedBasin { target: Target::Zero, immediate: true }));
}

#[test]
fn capture_by_a_at_two_i() {
    let cls = classify_tier(&Parameter::newton(c(0.0, 2.0)), Tier::Standard).unwrap();
    assert_eq!(cls.component_type, ComponentType::Capture);
    assert!(matches!(cls.kind, OrbitKind::FixedBasin { immediate: false, .. }));
}

#[test]
fn outside_parameter_is_rejected() {
    assert!(matches!(classify_tier(&Parameter::newton(c(2.0, 0.0)), Tier::Preview), Err(AtlasError::OutsideDomain(_))));
}

#[test]
fn tier_budgets_and_names() {
    assert_eq!([Tier::Preview.budget(), Tier::Standard.budget(), Tier::Analysis.budget()], [2_000, 20_000, 200_000]);
    for t in [Tier::Preview, Tier::Standard, Tier::Analysis] {
        assert_eq!(t.slug().parse::<Tier>().unwrap(), t);
    }
    assert!("fast".parse::<Tier>().is_err());
}

#[test]
fn refine_and_detect_recover_the_superattracting_cycle() {
    let p = Parameter::newton(A2);
    let crit = free_critical_points(&p).unwrap();
    let kern = MapKernel::new(p);
    // the free critical point is itself periodic at the center
    let (z, mult) = refine_periodic(&p, crit.c_plus, 4).unwrap();
    assert!((z - crit.c_plus).norm() < 1e-8);
    assert!(mult.norm() < 1e-6);
    let tail: Vec<C64> = (0..40).map(|k| kern.iterate(crit.c_plus, k)).collect();
    let cyc = detect_cycle(&p, &tail).unwrap();
    assert_eq!(cyc.period, 4);
    assert_eq!(cyc.points.len(), 4);
    for w in &cyc.points {
        assert!((kern.iterate(*w, 4) - w).norm() < 1e-9);
    }
}

#[test]
fn newton_center_search_finds_a2() {
    let rep = center_search_newton(2, (1.001, 10.0)).unwrap();
    let top = rep.centers.iter().copied().max_by(|x, y| x.im.total_cmp(&y.im)).unwrap();
    assert!((top - A2).norm() < 1e-12, "{top}");
    for a in &rep.centers {
        assert!(a.re == 0.0);
        assert_eq!(classify_tier(&Parameter::newton(*a), Tier::Standard).unwrap().component_type, ComponentType::Tricorn(4));
    }
}

#[test]
fn newton_center_search_period_six() {
    let rep = center_search_newton(3, (1.001, 10.0)).unwrap();
    assert!(!rep.centers.is_empty());
    for a in &rep.centers {
        assert!(center_residual(Family::NewtonQuartic, *a, 3).unwrap().norm() < 1e-9);
    }
}

#[test]
fn center_search_rejects_bad_ranges() {
    assert!(center_search_newton(2, (0.5, 3.0)).is_err());
    assert!(center_search_newton(2, (3.0, 2.0)).is_err());
    assert!(center_search_antipodal(0, &[c(1.0, 1.0)]).is_err());
}

#[test]
fn antipodal_tongue_center_at_3i() {
    let rep = center_search_antipodal(1, &quadrant_seed_grid(5)).unwrap();
    assert!(rep.centers.iter().any(|q| (q - c(0.0, 3.0)).norm() < 1e-9), "{:?}", rep.centers);
    let cls = classify_tier(&Parameter::antipodal(c(0.0, 3.0)), Tier::Standard).unwrap();
    assert_eq!(cls.component_type, ComponentType::Tricorn(2));
    let cyc = cls.cycle().unwrap();
    assert!(cyc.self_symmetric);
    // the cycle is exchanged by the antipodal map
    let eta = involution_c(Family::AntipodalCubic, cyc.points[0]);
    assert!(cyc.points.iter().any(|w| (w - eta).norm() < 1e-8));
}

#[test]
fn classification_is_stable_under_budget_doubling() {
    let params = [
        Parameter::newton(A2),
        Parameter::newton(c(0.0, 2.0)),
        Parameter::newton(c(1.0, 2.0)),
        Parameter::newton(c(-0.3, 3.3)),
        Parameter::antipodal(c(0.0, 3.0)),
        Parameter::antipodal(c(0.01, 0.0)),
        Parameter::antipodal(c(1.0, 1.0)),
    ];
    let tol = Tolerances::default();
    for p in params {
        let a = classify(&p, 20_000, &tol).unwrap();
        let b = classify(&p, 40_000, &tol).unwrap();
        if a.is_decided() {
            assert_eq!(a.component_type, b.component_type, "{p:?}");
        }
    }
}

#[test]
fn mirror_parameters_share_component_types() {
    // a -> -conj a conjugates the map by z -> -conj z
    for a in [c(0.7, 2.1), c(1.3, 3.0), c(0.2, 4.7), c(2.0, 3.5)] {
        let l = classify_tier(&Parameter::newton(a), Tier::Standard).unwrap();
        let r = classify_tier(&Parameter::newton(-a.conj()), Tier::Standard).unwrap();
        assert_eq!(l.component_type, r.component_type, "{a}");
    }
}

#[test]
fn tricorn_cycles_are_self_symmetric_and_mandelbrot_cycles_are_not() {
    let mut seen_tricorn = false;
    for i in 0..30 {
        for j in 0..30 {
            let a = c(-1.5 + 0.1 * i as f64, 1.5 + 0.12 * j as f64);
            let Ok(cls) = classify_tier(&Parameter::newton(a), Tier::Preview) else { continue };
            match cls.component_type {
                ComponentType::Tricorn(p) => {
                    seen_tricorn = true;
                    assert!(p % 2 == 0 && cls.cycle().unwrap().self_symmetric);
                }
                ComponentType::Mandelbrot(_) => assert!(!cls.cycle().unwrap().self_symmetric),
                _ => {}
            }
        }
    }
    assert!(seen_tricorn);
}

#[test]
fn cache_returns_the_same_answer() {
    let cache = ClassifyCache::new();
    let p = Parameter::newton(A2);
    let a = cache.classify(&p, Tier::Preview).unwrap();
    let b = cache.classify(&p, Tier::Preview).unwrap();
    assert_eq!(a, b);
    assert_eq!(cache.len(), 1);
}

fn involution_target(t: Target) -> Target {
    match t {
        Target::A => Target::ABar,
        Target::ABar => Target::A,
        Target::Zero => Target::Infinity,
        Target::Infinity => Target::Zero,
        o => o,
    }
}

#[test]
fn classifying_from_the_other_critical_point_gives_the_involution_image() {
    let mut rng = StdRng::seed_from_u64(50);
    let tol = Tolerances::default();
    let mut compared = 0;
    for i in 0..50 {
        let p = if i % 2 == 0 {
            let x: f64 = rng.random_range(-2.0..2.0);
            Parameter::newton(c(x, ((x * x + 2.0) / 2.0).sqrt() + rng.random_range(0.05..3.05)))
        } else {
            Parameter::antipodal(c(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)))
        };
        let crit = free_critical_points(&p).unwrap();
        let kern = MapKernel::new(p);
        let a = classify_from(&kern, &p, (crit.c_plus, crit.c_minus), 20_000, &tol).unwrap();
        let b = classify_from(&kern, &p, (crit.c_minus, crit.c_plus), 20_000, &tol).unwrap();
        if !a.is_decided() || !b.is_decided() {
            continue;
        }
        compared += 1;
        assert_eq!(a.component_type, b.component_type, "{p:?}");
        match (&a.kind, &b.kind) {
            (OrbitKind::FixedBasin { target: ta, .. }, OrbitKind::FixedBasin { target: tb, .. }) => {
                assert_eq!(involution_target(*ta), *tb, "{p:?}")
            }
            (OrbitKind::AttractingCycle { cycle: ca }, OrbitKind::AttractingCycle { cycle: cb }) => {
                for z in &ca.points {
                    let w = involution_c(p.family, *z);
                    assert!(cb.points.iter().any(|u| (u - w).norm() < 1e-6 * (1.0 + w.norm())), "{p:?}");
                }
            }
            o => panic!("{p:?}: {o:?}"),
        }
    }
    assert!(compared >= 40, "{compared}");
}
