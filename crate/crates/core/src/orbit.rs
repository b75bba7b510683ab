//! Free critical orbit classification, cycle refinement and center searches.

use crate::error::{AtlasError, Result};
use crate::family::{cstr, cstr_vec, free_critical_points, newton_fprime, Family, MapKernel, Parameter, C64};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::RwLock;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    Preview,
    Standard,
    Analysis,
}

impl Tier {
    pub fn budget(self) -> usize {
        match self {
            Tier::Preview => 2_000,
            Tier::Standard => 20_000,
            Tier::Analysis => 200_000,
        }
    }

    pub fn slug(self) -> &'static str {
        match self {
            Tier::Preview => "preview",
            Tier::Standard => "standard",
            Tier::Analysis => "analysis",
        }
    }
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.slug())
    }
}

impl FromStr for Tier {
    type Err = AtlasError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "preview" => Ok(Tier::Preview),
            "standard" => Ok(Tier::Standard),
            "analysis" => Ok(Tier::Analysis),
            o => Err(AtlasError::InvalidArgument(format!("unknown tier '{o}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub fixed_capture: f64,
    pub contraction_steps: usize,
    pub near_return: f64,
    pub residual: f64,
    pub symmetry: f64,
    pub period_cap: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            fixed_capture: 1e-8,
            contraction_steps: 10,
            near_return: 1e-6,
            residual: 1e-12,
            symmetry: 1e-8,
            period_cap: 64,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Target {
    One,
    MinusOne,
    A,
    ABar,
    Zero,
    Infinity,
}

impl Target {
    pub fn label(self) -> &'static str {
        match self {
            Target::One => "1",
            Target::MinusOne => "-1",
            Target::A => "a",
            Target::ABar => "conj(a)",
            Target::Zero => "0",
            Target::Infinity => "inf",
        }
    }

    /// Finite location of the superattracting fixed point, if any.
    pub fn point(self, param: &Parameter) -> Option<C64> {
        match self {
            Target::One => Some(C64::new(1.0, 0.0)),
            Target::MinusOne => Some(C64::new(-1.0, 0.0)),
            Target::A => Some(param.value),
            Target::ABar => Some(param.value.conj()),
            Target::Zero => Some(C64::new(0.0, 0.0)),
            Target::Infinity => None,
        }
    }

    pub fn all(family: Family) -> &'static [Target] {
        match family {
            Family::NewtonQuartic => &[Target::One, Target::MinusOne, Target::A, Target::ABar],
            Family::AntipodalCubic => &[Target::Zero, Target::Infinity],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cycle {
    #[serde(with = "cstr_vec")]
    pub points: Vec<C64>,
    pub period: usize,
    #[serde(with = "cstr")]
    pub multiplier: C64,
    pub self_symmetric: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum OrbitKind {
    FixedBasin { target: Target, immediate: bool },
    AttractingCycle { cycle: Cycle },
    Undecided { budget_spent: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ComponentType {
    Principal,
    Capture,
    Mandelbrot(usize),
    Tricorn(usize),
    Unknown,
}

impl fmt::Display for ComponentType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComponentType::Principal => write!(f, "Principal"),
            ComponentType::Capture => write!(f, "Capture"),
            ComponentType::Mandelbrot(p) => write!(f, "Mandelbrot({p})"),
            ComponentType::Tricorn(p) => write!(f, "Tricorn({p})"),
            ComponentType::Unknown => write!(f, "Unknown"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrbitClassification {
    pub kind: OrbitKind,
    pub component_type: ComponentType,
    /// Iterations of the critical orbit actually performed.
    pub iterations: usize,
}

impl OrbitClassification {
    pub fn is_decided(&self) -> bool {
        !matches!(self.kind, OrbitKind::Undecided { .. })
    }

    pub fn cycle(&self) -> Option<&Cycle> {
        match &self.kind {
            OrbitKind::AttractingCycle { cycle } => Some(cycle),
            _ => None,
        }
    }
}

fn finite(z: C64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// Newton on G(z) = F^p(z) - z with the chain-rule derivative.
pub fn refine_periodic_kernel(kern: &MapKernel, z0: C64, p: usize) -> Result<(C64, C64)> {
    let mut z = z0;
    for _ in 0..50 {
        let (w, d) = kern.iterate_d(z, p);
        if !finite(w) || !finite(d) {
            return Err(AtlasError::NoConvergence(50));
        }
        let g = w - z;
        if g.norm() < 1e-12 * z.norm().max(1.0) {
            return Ok((z, d));
        }
        let dg = d - 1.0;
        if dg.norm() < 1e-14 {
            return Err(AtlasError::DerivativeSingular);
        }
        z -= g / dg;
    }
    let (w, d) = kern.iterate_d(z, p);
    if (w - z).norm() < 1e-12 * z.norm().max(1.0) {
        Ok((z, d))
    } else {
        Err(AtlasError::NoConvergence(50))
    }
}

pub fn refine_periodic(param: &Parameter, z0: C64, p: usize) -> Result<(C64, C64)> {
    param.check_finite()?;
    refine_periodic_kernel(&MapKernel::new(*param), z0, p)
}

fn build_cycle(kern: &MapKernel, z: C64, p: usize, tol: &Tolerances) -> Cycle {
    // minimal period: smallest divisor whose rotation closes
    let mut period = p;
    for d in 1..p {
        if p.is_multiple_of(d) && (kern.iterate(z, d) - z).norm() < 1e-10 * z.norm().max(1.0) {
            period = d;
            break;
        }
    }
    let mut points = Vec::with_capacity(period);
    let mut w = z;
    let mut mult = C64::new(1.0, 0.0);
    for _ in 0..period {
        points.push(w);
        let (nw, dw) = kern.map_d(w);
        mult *= dw;
        w = nw;
    }
    let self_symmetric = points.iter().all(|&x| {
        let y = kern.involution(x);
        points.iter().any(|&c| (c - y).norm() < tol.symmetry * c.norm().max(1.0))
    });
    Cycle { points, period, multiplier: mult, self_symmetric }
}

/// Finds the minimal near-return period of an orbit tail and refines the cycle.
pub fn detect_cycle(param: &Parameter, orbit_tail: &[C64]) -> Result<Cycle> {
    detect_cycle_tol(param, orbit_tail, &Tolerances::default())
}

pub fn detect_cycle_tol(param: &Parameter, orbit_tail: &[C64], tol: &Tolerances) -> Result<Cycle> {
    let kern = MapKernel::new(*param);
    let n = orbit_tail.len();
    if n < 2 {
        return Err(AtlasError::NoCycleFound);
    }
    let last = orbit_tail[n - 1];
    let mut found = None;
    for p in 1..n {
        if (orbit_tail[n - 1 - p] - last).norm() < tol.near_return {
            found = Some(p);
            break;
        }
    }
    let p = found.ok_or(AtlasError::NoCycleFound)?;
    if p > tol.period_cap {
        return Err(AtlasError::PeriodCapExceeded(p));
    }
    let (z, _) = refine_periodic_kernel(&kern, last, p)?;
    Ok(build_cycle(&kern, z, p, tol))
}

/// Trapping radius around a superattracting fixed point of local degree two.
/// Radius of a disk around the superattracting point that the map sends well inside itself,
/// checked on sampled circles. A larger disk shortens the ascent by several steps per level.
fn trap_radius(kern: &MapKernel, zeta: C64) -> f64 {
    let c2 = kern.iterate_jet(zeta, 1).c[2].norm();
    let mut r = (0.25 / c2.max(1e-300)).min(0.5);
    let contracts = |r: f64| {
        [1.0, 0.5, 0.25].iter().all(|s| {
            (0..64).all(|j| {
                let z = zeta + C64::from_polar(r * s, std::f64::consts::TAU * j as f64 / 64.0);
                let w = kern.map(z);
                finite(w) && (w - zeta).norm() < 0.5 * r * s
            })
        })
    };
    while r > 1e-6 && !contracts(r) {
        r *= 0.5;
    }
    r
}

/// Steps the orbit until it enters the trapping disk around zeta: (k, f^k(z) - zeta, (f^k)'(z)).
fn descend(kern: &MapKernel, z: C64, zeta: C64, delta: f64, max_iter: usize) -> Option<(usize, C64, C64)> {
    let mut w = z;
    let mut d = C64::new(1.0, 0.0);
    for k in 0..max_iter {
        let e = w - zeta;
        if e.norm() < delta {
            return Some((k, e, d));
        }
        let (nw, dw) = kern.map_d(w);
        if !finite(nw) {
            return None;
        }
        d *= dw;
        w = nw;
    }
    None
}

/// Ascends the basin potential by damped Newton steps on f^k(z) = zeta.
/// Returns Some(true) when the path reaches the trapping disk itself and None when
/// the map evaluations counted in `work` exceed `work_cap`.
fn ascend_to(kern: &MapKernel, start: C64, zeta: C64, delta: f64, cap0: f64, work: &mut usize, work_cap: usize) -> Option<bool> {
    let mut z = start;
    let mut cap = cap0;
    let mut best_k = usize::MAX;
    let mut since_best = 0;
    let mut budget = 3000;
    let mut step_no = 0;
    while step_no < budget {
        step_no += 1;
        let Some((k, e, d)) = descend(kern, z, zeta, delta, 200_000) else { return Some(false) };
        if k == 0 {
            return Some(true);
        }
        *work += k;
        if *work > work_cap {
            return None;
        }
        if best_k == usize::MAX {
            // slow passages through near-parabolic gates need a few steps per unit of k
            budget += 16 * k;
        }
        // a successful ascent lowers k every few steps; a stall means a critical point of f^k
        if k < best_k {
            best_k = k;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best > 150 {
                return Some(false);
            }
        }
        if e.norm() < 1e-14 || d.norm() == 0.0 {
            return Some(false);
        }
        // same gradient direction either way; the longer fraction only when k moves slowly
        let frac = if since_best > 4 { 0.9 } else { 0.5 };
        let mut step = -frac * e / d;
        let lim = cap.min(0.05 * (1.0 + z.norm()));
        if step.norm() > lim {
            step *= lim / step.norm();
        }
        z += step;
        cap *= 1.5;
    }
    Some(false)
}

/// Map evaluations the immediacy test may spend per unit of orbit budget.
pub const IMMEDIACY_WORK_PER_BUDGET: usize = 500;

/// Decides whether z lies in the immediate basin of the superattracting fixed point zeta.
/// Uses the gradient flow of the basin Green function: it stays inside one Fatou component
/// and, started next to a critical point of the immediate basin, reaches zeta.
/// None means the work cap, shared by all ascents, ran out first.
pub fn immediate_basin_membership(kern: &MapKernel, z: C64, zeta: C64, around_critical: bool, work_cap: usize) -> Option<bool> {
    let delta = trap_radius(kern, zeta);
    if (z - zeta).norm() < delta {
        return Some(true);
    }
    let mut work = 0;
    if !around_critical {
        return ascend_to(kern, z, zeta, delta, 1e-3 * (1.0 + z.norm()), &mut work, work_cap);
    }
    let eps = 1e-6 * (1.0 + z.norm());
    let mut exhausted = false;
    for j in 0..8 {
        let u = C64::from_polar(eps, j as f64 * std::f64::consts::FRAC_PI_4 + 0.1);
        match ascend_to(kern, z + u, zeta, delta, 2.0 * eps, &mut work, work_cap) {
            Some(true) => return Some(true),
            Some(false) => {}
            None => {
                exhausted = true;
                break;
            }
        }
    }
    if exhausted {
        None
    } else {
        Some(false)
    }
}

/// As [`immediate_basin_membership`] with a generous cap; exhaustion counts as outside.
pub fn in_immediate_basin(kern: &MapKernel, z: C64, zeta: C64, around_critical: bool) -> bool {
    immediate_basin_membership(kern, z, zeta, around_critical, 100_000_000).unwrap_or(false)
}

fn component_for(kind: &OrbitKind) -> ComponentType {
    match kind {
        OrbitKind::FixedBasin { immediate: true, .. } => ComponentType::Principal,
        OrbitKind::FixedBasin { immediate: false, .. } => ComponentType::Capture,
        OrbitKind::AttractingCycle { cycle } if cycle.self_symmetric => ComponentType::Tricorn(cycle.period),
        OrbitKind::AttractingCycle { cycle } => ComponentType::Mandelbrot(cycle.period),
        OrbitKind::Undecided { .. } => ComponentType::Unknown,
    }
}

fn immediacy(kern: &MapKernel, param: &Parameter, crit: (C64, C64), target: Target, work_cap: usize) -> Option<bool> {
    match target {
        // the a, conj(a) basins carry no free critical point in their immediate basins
        Target::A | Target::ABar => Some(false),
        Target::One | Target::MinusOne | Target::Zero => {
            immediate_basin_membership(kern, crit.0, target.point(param).unwrap(), true, work_cap)
        }
        // c_plus in the immediate basin of infinity iff c_minus = eta(c_plus) is in that of 0
        Target::Infinity => immediate_basin_membership(kern, crit.1, C64::new(0.0, 0.0), true, work_cap),
    }
}

/// Classifies the orbit of c_plus; the c_minus orbit is its involution image.
pub fn classify(param: &Parameter, budget: usize, tol: &Tolerances) -> Result<OrbitClassification> {
    param.require_domain()?;
    let crit = free_critical_points(param)?;
    let kern = MapKernel::new(*param);
    classify_from(&kern, param, (crit.c_plus, crit.c_minus), budget, tol)
}

pub fn classify_tier(param: &Parameter, tier: Tier) -> Result<OrbitClassification> {
    classify(param, tier.budget(), &Tolerances::default())
}

/// Classification started from the given critical point (first entry of `crit`).
pub fn classify_from(
    kern: &MapKernel,
    param: &Parameter,
    crit: (C64, C64),
    budget: usize,
    tol: &Tolerances,
) -> Result<OrbitClassification> {
    let targets: Vec<(Target, C64)> = Target::all(param.family)
        .iter()
        .filter_map(|t| t.point(param).map(|p| (*t, p)))
        .collect();
    let has_inf_target = param.family == Family::AntipodalCubic;
    const RING: usize = 128;
    let mut ring = [C64::new(0.0, 0.0); RING];
    let mut z = crit.0;
    let done = |kind: OrbitKind, it: usize| {
        let component_type = component_for(&kind);
        Ok(OrbitClassification { kind, component_type, iterations: it })
    };
    let work_cap = budget.saturating_mul(IMMEDIACY_WORK_PER_BUDGET);
    let basin = |target: Target, it: usize| match immediacy(kern, param, crit, target, work_cap) {
        Some(immediate) => done(OrbitKind::FixedBasin { target, immediate }, it),
        // the gradient ascent ran out of work: leave the verdict open
        None => done(OrbitKind::Undecided { budget_spent: it }, it),
    };
    for k in 0..budget {
        for &(t, p) in &targets {
            if (z - p).norm() < tol.fixed_capture {
                // confirm contraction before declaring capture
                let mut w = z;
                let mut ok = true;
                for _ in 0..tol.contraction_steps {
                    w = kern.map(w);
                    if (w - p).norm() >= tol.fixed_capture {
                        ok = false;
                        break;
                    }
                }
                if ok {
                    return basin(t, k);
                }
            }
        }
        if has_inf_target && z.norm() > 1.0 / tol.fixed_capture {
            return basin(Target::Infinity, k);
        }
        z = kern.map(z);
        if !finite(z) {
            if has_inf_target {
                return basin(Target::Infinity, k + 1);
            }
            // a Newton pole lands on the repelling fixed point at infinity
            return done(OrbitKind::Undecided { budget_spent: k + 1 }, k + 1);
        }
        ring[k % RING] = z;
        // an orbit about to land on a known target is left to the capture test
        let landing = targets.iter().any(|(_, p)| (z - p).norm() < tol.near_return);
        if k >= RING && k % 64 == 0 && !landing {
            let mut found = None;
            for p in 1..=tol.period_cap {
                if (ring[(k - p) % RING] - z).norm() < tol.near_return {
                    found = Some(p);
                    break;
                }
            }
            if let Some(p) = found {
                if let Ok((zc, mult)) = refine_periodic_kernel(kern, z, p) {
                    if mult.norm() < 1.0 && (zc - z).norm() < 1e-3 {
                        let cycle = build_cycle(kern, zc, p, tol);
                        return done(OrbitKind::AttractingCycle { cycle }, k);
                    }
                }
            }
        }
    }
    done(OrbitKind::Undecided { budget_spent: budget }, budget)
}

/// Memo table keyed by (family, parameter bits, tier).
#[derive(Default)]
pub struct ClassifyCache {
    map: RwLock<HashMap<(Family, u64, u64, Tier), OrbitClassification>>,
}

impl ClassifyCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn classify(&self, param: &Parameter, tier: Tier) -> Result<OrbitClassification> {
        let key = (param.family, param.value.re.to_bits(), param.value.im.to_bits(), tier);
        if let Some(v) = self.map.read().unwrap().get(&key) {
            return Ok(v.clone());
        }
        let v = classify_tier(param, tier)?;
        self.map.write().unwrap().insert(key, v.clone());
        Ok(v)
    }

    pub fn len(&self) -> usize {
        self.map.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CenterSearchReport {
    pub half_period: usize,
    #[serde(with = "cstr_vec")]
    pub centers: Vec<C64>,
    /// Sampled t values where the critical orbit hit a pole.
    pub pole_hits: Vec<f64>,
    /// Roots of g that failed verification, with the verdict found there.
    pub rejected: Vec<(String, String)>,
}

/// g(t) = Im(N^n(c) + c) for a = it; None when the orbit lands on a pole.
pub fn symmetric_center_function(t: f64, n: usize) -> Option<f64> {
    let a = C64::new(0.0, t);
    let kern = MapKernel::new(Parameter::newton(a));
    let c = C64::new(0.0, ((t * t - 1.0) / 6.0).sqrt());
    let mut z = c;
    for _ in 0..n {
        if newton_fprime(a, z).0.norm() < 1e-12 {
            return None;
        }
        z = kern.map(z);
        if !finite(z) {
            return None;
        }
    }
    Some((z + c).im)
}

pub fn center_search_newton(n: usize, t_range: (f64, f64)) -> Result<CenterSearchReport> {
    let (t0, t1) = t_range;
    if !(t0 > 1.0 && t1 > t0) {
        return Err(AtlasError::PreconditionFailed("t_range must lie in (1, inf)".into()));
    }
    const SAMPLES: usize = 20_000;
    let mut report = CenterSearchReport { half_period: n, ..Default::default() };
    let ts: Vec<f64> = (0..=SAMPLES).map(|i| t0 + (t1 - t0) * i as f64 / SAMPLES as f64).collect();
    let gs: Vec<Option<f64>> = ts.iter().map(|&t| symmetric_center_function(t, n)).collect();
    for (t, g) in ts.iter().zip(&gs) {
        if g.is_none() {
            report.pole_hits.push(*t);
        }
    }
    let mut brackets = 0;
    for i in 0..SAMPLES {
        let (Some(g0), Some(g1)) = (gs[i], gs[i + 1]) else { continue };
        // sign changes through a pole show up as large jumps
        if g0.signum() == g1.signum() || g0.abs() > 5.0 || g1.abs() > 5.0 {
            continue;
        }
        brackets += 1;
        let Some(t) = polish_root(|t| symmetric_center_function(t, n), ts[i], ts[i + 1], g0) else { continue };
        let a = C64::new(0.0, t);
        if report.centers.iter().any(|c| (c - a).norm() < 1e-8) {
            continue;
        }
        match classify_tier(&Parameter::newton(a), Tier::Analysis) {
            Ok(cls) if cls.component_type == ComponentType::Tricorn(2 * n) => report.centers.push(a),
            Ok(cls) => report.rejected.push((crate::family::format_complex(a), cls.component_type.to_string())),
            Err(e) => report.rejected.push((crate::family::format_complex(a), e.to_string())),
        }
    }
    if brackets == 0 {
        return Err(AtlasError::NoRootInRange(format!("no sign change of g on ({t0}, {t1}) for n = {n}")));
    }
    Ok(report)
}

/// Bisection followed by secant polishing.
fn polish_root(g: impl Fn(f64) -> Option<f64>, mut lo: f64, mut hi: f64, glo: f64) -> Option<f64> {
    let slo = glo.signum();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let gm = g(mid)?;
        if gm == 0.0 {
            return Some(mid);
        }
        if gm.signum() == slo {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi.abs() {
            break;
        }
    }
    let (mut a, mut b) = (lo, hi);
    let (mut ga, mut gb) = (g(a)?, g(b)?);
    for _ in 0..8 {
        if gb == ga {
            break;
        }
        let c = b - gb * (b - a) / (gb - ga);
        if !(c >= lo.min(hi) - 1e-12 && c <= hi.max(lo) + 1e-12) {
            break;
        }
        a = b;
        ga = gb;
        b = c;
        gb = g(b)?;
    }
    let best = if ga.abs() < gb.abs() { a } else { b };
    if g(best)?.abs() < 1e-12 {
        Some(best)
    } else {
        None
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AntipodalCenterReport {
    pub return_time: usize,
    #[serde(with = "cstr_vec")]
    pub centers: Vec<C64>,
    pub failed_seeds: usize,
}

/// The {0.2, ..., 4.0}^2 first-quadrant seed grid.
pub fn quadrant_seed_grid(per_axis: usize) -> Vec<C64> {
    let step = |i: usize| 0.2 + 3.8 * i as f64 / (per_axis.max(2) - 1) as f64;
    let mut v = Vec::with_capacity(per_axis * per_axis);
    for i in 0..per_axis {
        for j in 0..per_axis {
            v.push(C64::new(step(i), step(j)));
        }
    }
    v
}

/// f_q^r(c_0(q)) - c_inf(q).
pub fn antipodal_center_residual(q: C64, r: usize) -> Option<C64> {
    center_residual(Family::AntipodalCubic, q, r)
}

/// f^r(c_plus) - c_minus: zero at centers of tricorn components of period dividing 2r.
pub fn center_residual(family: Family, a: C64, r: usize) -> Option<C64> {
    let p = Parameter::new(family, a);
    let crit = free_critical_points(&p).ok()?;
    let w = MapKernel::new(p).iterate(crit.c_plus, r);
    let g = w - crit.c_minus;
    finite(g).then_some(g)
}

pub fn center_search_antipodal(r: usize, seeds: &[C64]) -> Result<AntipodalCenterReport> {
    if r == 0 {
        return Err(AtlasError::PreconditionFailed("return time must be at least 1".into()));
    }
    let mut report = AntipodalCenterReport { return_time: r, ..Default::default() };
    for &seed in seeds {
        match antipodal_newton(seed, r) {
            Some(q) if !report.centers.iter().any(|c| (c - q).norm() < 1e-8 * q.norm().max(1.0)) => {
                let ok = matches!(
                    classify_tier(&Parameter::antipodal(q), Tier::Analysis).map(|c| c.component_type),
                    Ok(ComponentType::Tricorn(p)) if p.is_multiple_of(2) && (2 * r).is_multiple_of(p)
                );
                if ok {
                    report.centers.push(q);
                } else {
                    report.failed_seeds += 1;
                }
            }
            Some(_) => {}
            None => report.failed_seeds += 1,
        }
    }
    Ok(report)
}

fn antipodal_newton(seed: C64, r: usize) -> Option<C64> {
    center_newton(Family::AntipodalCubic, seed, r)
}

/// Damped Newton on the center residual. The residual is not holomorphic in the parameter,
/// so the real 2x2 Jacobian comes from differences with a step that follows the Newton steps.
pub fn center_newton(family: Family, seed: C64, r: usize) -> Option<C64> {
    let res = |a: C64| center_residual(family, a, r);
    let mut q = seed;
    let mut g = res(q)?;
    let mut h = 1e-7 * q.norm().max(1.0);
    for _ in 0..80 {
        let gx = (res(q + h)? - res(q - h)?) / (2.0 * h);
        let gy = (res(q + C64::new(0.0, h))? - res(q - C64::new(0.0, h))?) / (2.0 * h);
        // real 2x2 Jacobian [[gx.re, gy.re], [gx.im, gy.im]]
        let det = gx.re * gy.im - gy.re * gx.im;
        if det.abs() < 1e-300 {
            return None;
        }
        let dx = (-g.re * gy.im + gy.re * g.im) / det;
        let dy = (-gx.re * g.im + gx.im * g.re) / det;
        let full = C64::new(dx, dy);
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..12 {
            let cand = q + lambda * full;
            if let Some(gc) = res(cand) {
                if gc.norm() < g.norm() || lambda < 1e-3 {
                    accepted = Some((cand, gc));
                    break;
                }
            }
            lambda *= 0.5;
        }
        let (nq, ng) = accepted?;
        let moved = (nq - q).norm();
        q = nq;
        g = ng;
        if q.norm() > 1e3 {
            return None;
        }
        if moved < 1e-14 * q.norm().max(1.0) || g.norm() < 1e-14 {
            break;
        }
        let scale = q.norm().max(1.0);
        h = (1e-3 * moved).clamp(1e-13 * scale, 1e-7 * scale);
    }
    (g.norm() < 1e-10).then_some(q)
}
