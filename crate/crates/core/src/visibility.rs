//! Boundary fixed points of the half-return, multi-scale visibility probes of co-roots,
//! projection into the repelling Ecalle cylinder, and parameter scans beside parabolic arcs.

use crate::basin::{label_components, BasinClassifier, PetalTest, PointClass};
use crate::error::{AtlasError, Result};
use crate::family::{cstr, cstr_vec, free_critical_points, Family, MapKernel, Parameter, C64};
use crate::orbit::{center_newton, classify_tier, in_immediate_basin, ComponentType, Target, Tier, Tolerances};
use crate::parabolic::{arc_normal, find_boundary_parabolic, ArcSample, Expansion, ParabolicDatum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RootTag {
    Root,
    CoRoot,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryTriple {
    #[serde(with = "cstr_vec")]
    pub points: Vec<C64>,
    pub tags: Vec<RootTag>,
    /// Index of the point fixed by z -> -conj z (Newton parameters on the symmetry locus).
    pub symmetric_index: Option<usize>,
    /// |sigma(p) - p| per point.
    pub residuals: Vec<f64>,
    pub period: usize,
    /// Cycle point of the characteristic component U1.
    #[serde(with = "cstr")]
    pub characteristic_point: C64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state")]
pub enum VisibilityState {
    Visible { witness: Target },
    Invisible { floor: f64 },
    Undecided { floor: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleProbe {
    pub radius: f64,
    /// Basins whose immediate component reaches within the radius.
    pub present: Vec<Target>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VisibilityVerdict {
    #[serde(with = "cstr")]
    pub point: C64,
    #[serde(flatten)]
    pub state: VisibilityState,
    pub scales: Vec<ScaleProbe>,
}

impl VisibilityVerdict {
    pub fn is_visible(&self) -> bool {
        matches!(self.state, VisibilityState::Visible { .. })
    }

    pub fn is_invisible(&self) -> bool {
        matches!(self.state, VisibilityState::Invisible { .. })
    }
}

/// Coarse cylinder classes; each is preserved by the half-return.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CylinderClass {
    Characteristic,
    OtherSlot,
    PrincipalTarget,
    OtherTarget,
    Undecided,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CylinderRaster {
    pub width: usize,
    pub height: usize,
    pub h_max: f64,
    /// Row-major, row 0 at height -h_max.
    pub classes: Vec<CylinderClass>,
    pub u_h: f64,
    pub l_h: f64,
    /// Real part of the half-return offset in the repelling coordinate.
    pub beta_re: f64,
}

impl CylinderRaster {
    pub fn cell_height(&self, row: usize) -> f64 {
        -self.h_max + (row as f64 + 0.5) * 2.0 * self.h_max / self.height as f64
    }

    pub fn fraction(&self, class: CylinderClass) -> f64 {
        self.classes.iter().filter(|c| **c == class).count() as f64 / self.classes.len() as f64
    }

    /// Share of cells whose class differs from the class at the image of the half-return,
    /// which acts on the cylinder as (x, y) -> (x + Re beta, -y).
    pub fn glide_mismatch(&self) -> f64 {
        let (w, h) = (self.width, self.height);
        let shift = (self.beta_re.rem_euclid(1.0) * w as f64).round() as usize;
        let mut bad = 0;
        for y in 0..h {
            for x in 0..w {
                let gx = (x + shift) % w;
                let gy = h - 1 - y;
                if self.classes[y * w + x] != self.classes[gy * w + gx] {
                    bad += 1;
                }
            }
        }
        bad as f64 / (w * h) as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hit {
    #[serde(with = "cstr")]
    pub param: C64,
    pub period: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    #[serde(with = "cstr_vec")]
    pub arc_segment: Vec<C64>,
    pub principal_contact: bool,
    pub capture_count: usize,
    #[serde(with = "cstr_vec")]
    pub capture_samples: Vec<C64>,
    pub tricorn_hits: Vec<Hit>,
    pub mandelbrot_hits: Vec<Hit>,
    /// Height interval of the arc samples with no Mandelbrot pixel beside them.
    pub h_window: (f64, f64),
    pub classified: usize,
    /// Verdicts along each normal, outermost first.
    pub strips: Vec<Vec<StripSample>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StripSample {
    pub offset: f64,
    #[serde(with = "cstr")]
    pub param: C64,
    pub component: ComponentType,
}

/// Closed-form Newton step for the real system conj(G(z)) = z. Returns the point, its
/// residual and |G'| there.
pub fn sigma_fixed_newton(kern: &MapKernel, n: usize, z0: C64) -> Option<(C64, f64, f64)> {
    let mut z = z0;
    for _ in 0..80 {
        let (g, dg) = kern.half_return_g(z, n);
        let r = g.conj() - z;
        if !(r.re.is_finite() && r.im.is_finite()) {
            return None;
        }
        let gg = dg.conj();
        let den = gg.norm_sqr() - 1.0;
        if den.abs() < 1e-14 {
            return None;
        }
        let mut dz = -(r + gg * r.conj()) / den;
        let lim = 0.1 * (1.0 + z.norm());
        if dz.norm() > lim {
            dz *= lim / dz.norm();
        }
        z += dz;
        if dz.norm() < 1e-16 * (1.0 + z.norm()) {
            break;
        }
    }
    let (g, dg) = kern.half_return_g(z, n);
    let res = (g.conj() - z).norm();
    res.is_finite().then_some((z, res, dg.norm()))
}

struct Raster {
    center: C64,
    half: f64,
    n: usize,
}

impl Raster {
    fn point(&self, i: usize) -> C64 {
        let (x, y) = (i % self.n, i / self.n);
        let px = 2.0 * self.half / self.n as f64;
        self.center + C64::new(-self.half + (x as f64 + 0.5) * px, -self.half + (y as f64 + 0.5) * px)
    }

    fn index(&self, z: C64) -> Option<usize> {
        let px = 2.0 * self.half / self.n as f64;
        let fx = ((z.re - self.center.re + self.half) / px).floor();
        let fy = ((z.im - self.center.im + self.half) / px).floor();
        if fx < 0.0 || fy < 0.0 || fx >= self.n as f64 || fy >= self.n as f64 {
            return None;
        }
        Some(fy as usize * self.n + fx as usize)
    }

    fn pixel(&self) -> f64 {
        2.0 * self.half / self.n as f64
    }
}

/// Rotates the cycle so that its first point is the one attracting c_plus.
fn characteristic_cycle(param: &Parameter) -> Result<(Vec<C64>, usize)> {
    let cls = classify_tier(param, Tier::Analysis)?;
    let period = match cls.component_type {
        ComponentType::Tricorn(p) => p,
        other => {
            return Err(AtlasError::PreconditionFailed(format!("parameter classifies as {other}, expected a tricorn component")))
        }
    };
    let cycle = cls.cycle().unwrap().points.clone();
    let kern = MapKernel::new(*param);
    let tail = kern.iterate(free_critical_points(param)?.c_plus, period * 2000);
    let k = (0..period)
        .min_by(|&a, &b| (cycle[a] - tail).norm().total_cmp(&(cycle[b] - tail).norm()))
        .unwrap();
    let rotated: Vec<C64> = (0..period).map(|j| cycle[(k + j) % period]).collect();
    Ok((rotated, period))
}

/// Component of U1 on a raster around its cycle point, grown until it fits.
fn characteristic_component(cls: &BasinClassifier, u1: C64) -> Result<(Raster, Vec<bool>)> {
    let n = 256;
    let mut half = 0.25 * (1.0 + u1.norm());
    for _ in 0..10 {
        let r = Raster { center: u1, half, n };
        let grid: Vec<i32> = (0..n * n)
            .into_par_iter()
            .map(|i| if cls.classify(r.point(i)).0 == PointClass::Slot(0) { 0 } else { -1 })
            .collect();
        let (comp, _) = label_components(&grid, n, n, false);
        let Some(home) = r.index(u1).map(|i| comp[i]).filter(|c| *c != usize::MAX) else {
            half *= 0.25;
            continue;
        };
        let mask: Vec<bool> = comp.iter().map(|c| *c == home).collect();
        let size = mask.iter().filter(|m| **m).count();
        let touches = (0..n).any(|k| mask[k] || mask[(n - 1) * n + k] || mask[k * n] || mask[k * n + n - 1]);
        if touches {
            half *= 2.0;
        } else if size < 400 {
            half *= 0.35;
        } else {
            return Ok((r, mask));
        }
    }
    Err(AtlasError::SeedingFailed(0))
}

/// The three fixed points of the half-return on the boundary of the characteristic component.
pub fn half_return_boundary_points(param: &Parameter) -> Result<BoundaryTriple> {
    param.require_domain()?;
    let (cycle, period) = characteristic_cycle(param)?;
    let n = period / 2;
    let u1 = cycle[0];
    let cls = BasinClassifier::new(*param, cycle.clone(), 4000);
    let kern = *cls.kernel();
    let (raster, mask) = characteristic_component(&cls, u1)?;
    let w = raster.n;
    let boundary: Vec<usize> = (0..w * w)
        .filter(|&i| {
            if !mask[i] {
                return false;
            }
            let (x, y) = (i % w, i / w);
            x == 0 || y == 0 || x + 1 == w || y + 1 == w || !mask[i - 1] || !mask[i + 1] || !mask[i - w] || !mask[i + w]
        })
        .collect();
    let stride = (boundary.len() / 384).max(1);
    let seeds: Vec<C64> = boundary.iter().step_by(stride).map(|&i| raster.point(i)).collect();
    let near_component = |p: C64| -> bool {
        let Some(i) = raster.index(p) else { return false };
        let (x, y) = ((i % w) as i64, (i / w) as i64);
        for dy in -3..=3 {
            for dx in -3..=3 {
                let (xx, yy) = (x + dx, y + dy);
                if xx >= 0 && yy >= 0 && xx < w as i64 && yy < w as i64 && mask[yy as usize * w + xx as usize] {
                    return true;
                }
            }
        }
        false
    };
    let mut found: Vec<(C64, f64)> = Vec::new();
    let solutions: Vec<Option<(C64, f64, f64)>> = seeds.par_iter().map(|&s| sigma_fixed_newton(&kern, n, s)).collect();
    for (z, res, dg) in solutions.into_iter().flatten() {
        // attracting cycle points are sigma-fixed too; keep boundary (non-attracting) ones
        if res > 1e-10 || dg < 1.0 - 1e-6 || !near_component(z) {
            continue;
        }
        if found.iter().all(|(p, _)| (p - z).norm() > 1e-8) {
            found.push((z, res));
        }
    }
    if found.len() < 3 {
        return Err(AtlasError::SeedingFailed(found.len()));
    }
    if found.len() > 3 {
        // extra solutions come from neighbouring components; keep the three closest to U1's cycle point
        found.sort_by(|a, b| (a.0 - u1).norm().total_cmp(&(b.0 - u1).norm()));
        found.truncate(3);
    }
    found.sort_by(|a, b| a.0.arg().total_cmp(&b.0.arg()));
    let points: Vec<C64> = found.iter().map(|f| f.0).collect();
    let residuals: Vec<f64> = found.iter().map(|f| f.1).collect();
    let mut tags = Vec::new();
    for &p in &points {
        tags.push(root_tag(&cls, &points, p, period)?);
    }
    let symmetric_index = if param.family == Family::NewtonQuartic && param.value.re == 0.0 {
        points.iter().position(|p| (-p.conj() - p).norm() < 1e-8)
    } else {
        None
    };
    Ok(BoundaryTriple { points, tags, symmetric_index, residuals, period, characteristic_point: u1 })
}

/// Root when another periodic component touches p: checked on a small circle and algebraically.
fn root_tag(cls: &BasinClassifier, triple: &[C64], p: C64, period: usize) -> Result<RootTag> {
    let kern = cls.kernel();
    // p lies on the boundary of U_{1+j} exactly when it is the image of a boundary point of U1
    let algebraic = (1..period).any(|j| triple.iter().any(|&q| (kern.iterate(q, j) - p).norm() < 1e-7 * (1.0 + p.norm())));
    // a touching component keeps its angular share as the circle shrinks; a nearby one does not
    let occupied = |radius: f64| -> std::collections::HashMap<usize, usize> {
        let samples: Vec<PointClass> = (0..256)
            .into_par_iter()
            .map(|k| cls.classify(p + C64::from_polar(radius, std::f64::consts::TAU * k as f64 / 256.0)).0)
            .collect();
        let mut slots = std::collections::HashMap::new();
        for s in samples {
            if let PointClass::Slot(j) = s {
                *slots.entry(j).or_insert(0usize) += 1;
            }
        }
        slots
    };
    let (coarse, fine) = (occupied(1e-4), occupied(1e-7));
    let slots: Vec<usize> = coarse.keys().filter(|j| coarse[j] >= 8 && fine.get(j).is_some_and(|c| *c >= 8)).copied().collect();
    let circle = slots.len() >= 2;
    match (algebraic, circle) {
        (true, true) => Ok(RootTag::Root),
        (false, false) => Ok(RootTag::CoRoot),
        _ => Err(AtlasError::AmbiguousTag(crate::family::format_complex(p))),
    }
}

fn distinguished_targets(family: Family) -> &'static [Target] {
    match family {
        Family::NewtonQuartic => &[Target::One, Target::MinusOne],
        Family::AntipodalCubic => &[Target::Zero],
    }
}

/// Probe radii 1e-2 * 2^-j down to the floor (inclusive).
pub fn probe_radii(floor: f64) -> Vec<f64> {
    let mut r = 1e-2;
    let mut out = Vec::new();
    while r > floor * 1.0000001 {
        out.push(r);
        r *= 0.5;
    }
    out.push(floor);
    out
}

/// Multi-scale test of whether the immediate basin of a distinguished fixed point reaches `point`.
pub fn coroot_visibility(param: &Parameter, point: C64) -> Result<VisibilityVerdict> {
    coroot_visibility_with(param, point, 1e-6, 128)
}

pub fn coroot_visibility_with(param: &Parameter, point: C64, floor: f64, resolution: usize) -> Result<VisibilityVerdict> {
    param.require_domain()?;
    let cycle = match classify_tier(param, Tier::Analysis)?.cycle() {
        Some(c) => c.points.clone(),
        None => vec![],
    };
    let cls = BasinClassifier::new(*param, cycle, 4000);
    let kern = *cls.kernel();
    let targets = distinguished_targets(param.family);
    let n = resolution;
    let mut scales = Vec::new();
    for r in probe_radii(floor) {
        let raster = Raster { center: point, half: 4.0 * r, n };
        let classes: Vec<(PointClass, usize)> = (0..n * n).into_par_iter().map(|i| cls.classify(raster.point(i))).collect();
        let mut present = Vec::new();
        for &t in targets {
            let grid: Vec<i32> = classes.iter().map(|(c, _)| if *c == PointClass::Target(t) { 0 } else { -1 }).collect();
            let (comp, count) = label_components(&grid, n, n, false);
            // per component: does it come within r of the point, and its fastest pixel
            let mut near = vec![false; count];
            let mut rep: Vec<Option<(usize, usize)>> = vec![None; count];
            let reach = r + raster.pixel();
            for i in 0..n * n {
                let c = comp[i];
                if c == usize::MAX {
                    continue;
                }
                if (raster.point(i) - point).norm() <= reach {
                    near[c] = true;
                }
                let it = classes[i].1;
                if rep[c].is_none_or(|(_, best)| it < best) {
                    rep[c] = Some((i, it));
                }
            }
            let mut candidates: Vec<(usize, usize)> =
                (0..count).filter(|&c| near[c]).map(|c| (rep[c].unwrap().1, rep[c].unwrap().0)).collect();
            candidates.sort();
            candidates.truncate(32);
            let zeta = t.point(param).unwrap();
            let hit = candidates
                .par_iter()
                .any(|&(_, i)| in_immediate_basin(&kern, raster.point(i), zeta, false));
            if hit {
                present.push(t);
            }
        }
        scales.push(ScaleProbe { radius: r, present });
    }
    let state = verdict_from_scales(&scales, targets, floor);
    Ok(VisibilityVerdict { point, state, scales })
}

fn verdict_from_scales(scales: &[ScaleProbe], targets: &[Target], floor: f64) -> VisibilityState {
    for &t in targets {
        if scales.iter().all(|s| s.present.contains(&t)) {
            return VisibilityState::Visible { witness: t };
        }
    }
    // invisible: every target, once absent, stays absent through the floor
    let settled = targets.iter().all(|t| {
        let first_miss = scales.iter().position(|s| !s.present.contains(t));
        match first_miss {
            Some(k) => scales[k..].iter().all(|s| !s.present.contains(t)),
            None => false,
        }
    });
    if settled {
        VisibilityState::Invisible { floor }
    } else {
        VisibilityState::Undecided { floor }
    }
}

/// Repelling-petal coordinate of a simple parabolic: Phi(u) with the log branch of the
/// repelling side, inverted through forward iteration from deep inside the petal.
struct RepellingCoordinate {
    kern: MapKernel,
    period: usize,
    z1: C64,
    exp: Expansion,
    shift: f64,
    beta_re: f64,
}

const REP_RADIUS: f64 = 100.0;

impl RepellingCoordinate {
    fn new(datum: &ParabolicDatum) -> Result<Self> {
        datum.require_simple()?;
        let kern = datum.kernel();
        let z1 = datum.parabolic_point;
        let exp = Expansion::from_jet(&kern.iterate_jet(z1, datum.period));
        let mut rc = RepellingCoordinate { kern, period: datum.period, z1, exp, shift: 0.0, beta_re: 0.0 };
        let mut beta = C64::new(0.0, 0.0);
        let ys = [-0.3, -0.1, 0.1, 0.3];
        for y in ys {
            let u = C64::new(-2.0 * REP_RADIUS, 2.0 * REP_RADIUS * y);
            let z = z1 - (rc.exp.a * u).inv();
            let s = kern.half_return(z, datum.period / 2);
            let us = -(rc.exp.a * (s - z1)).inv();
            beta += rc.phi(us) - rc.phi(u).conj();
        }
        beta /= ys.len() as f64;
        rc.shift = beta.im / 2.0;
        rc.beta_re = beta.re;
        Ok(rc)
    }

    fn phi(&self, u: C64) -> C64 {
        let mut r = u - self.exp.b * (-u).ln();
        let inv = u.inv();
        let mut p = inv;
        for j in 1..=8 {
            r += self.exp.c[j] * p;
            p *= inv;
        }
        r
    }

    fn dphi(&self, u: C64) -> C64 {
        let mut r = C64::new(1.0, 0.0) - self.exp.b / u;
        let inv = u.inv();
        let mut p = inv * inv;
        for j in 1..=8 {
            r -= j as f64 * self.exp.c[j] * p;
            p *= inv;
        }
        r
    }

    /// A dynamical point with normalized repelling coordinate w.
    fn inverse(&self, w: C64) -> C64 {
        let raw = w + C64::new(0.0, self.shift);
        let k = (raw.re + 2.0 * REP_RADIUS).ceil().max(0.0) as usize;
        let target = raw - k as f64;
        let mut u = target;
        for _ in 0..30 {
            let du = (self.phi(u) - target) / self.dphi(u);
            u -= du;
            if du.norm() < 1e-14 * u.norm() {
                break;
            }
        }
        let z0 = self.z1 - (self.exp.a * u).inv();
        self.kern.iterate(z0, k * self.period)
    }
}

fn coarse_class(c: PointClass, family: Family) -> CylinderClass {
    match c {
        PointClass::Slot(0) => CylinderClass::Characteristic,
        PointClass::Slot(_) => CylinderClass::OtherSlot,
        PointClass::Target(t) => match (family, t) {
            (Family::NewtonQuartic, Target::One | Target::MinusOne) => CylinderClass::PrincipalTarget,
            (Family::AntipodalCubic, Target::Zero | Target::Infinity) => CylinderClass::PrincipalTarget,
            _ => CylinderClass::OtherTarget,
        },
        PointClass::Undecided => CylinderClass::Undecided,
    }
}

/// Projects the dynamical plane into the repelling Ecalle cylinder of a simple parabolic.
/// Rows cover heights [-h_max, h_max]; columns one period of the real part.
pub fn cylinder_projection(datum: &ParabolicDatum, width: usize, height: usize, h_max: f64) -> Result<CylinderRaster> {
    if width < 4 || height < 4 || width % 2 == 1 {
        return Err(AtlasError::InvalidArgument("cylinder raster needs an even width and at least 4x4 cells".into()));
    }
    let rc = RepellingCoordinate::new(datum)?;
    let petal = PetalTest { z1: datum.parabolic_point, a: datum.local_coeffs.a, radius: 20.0 };
    let cls = BasinClassifier::new(datum.param, datum.cycle.clone(), 200_000).with_petal(petal);
    let family = datum.param.family;
    // x offset keeps the fundamental annulus a few units inside the repelling petal
    let x0 = -5.0;
    let classes: Vec<CylinderClass> = (0..width * height)
        .into_par_iter()
        .map(|i| {
            let (x, y) = (i % width, i / width);
            let w = C64::new(x0 + (x as f64 + 0.5) / width as f64, -h_max + (y as f64 + 0.5) * 2.0 * h_max / height as f64);
            let z = rc.inverse(w);
            coarse_class(cls.classify(z).0, family)
        })
        .collect();
    // the characteristic region containing the upper end of the cylinder
    let grid: Vec<i32> = classes.iter().map(|c| if *c == CylinderClass::Characteristic { 0 } else { -1 }).collect();
    let (comp, _) = label_components(&grid, width, height, true);
    let top = (height - 1) * width;
    let upper = (0..width).map(|x| comp[top + x]).find(|c| *c != usize::MAX);
    let (mut u_h, mut l_h) = (f64::NAN, f64::NAN);
    if let Some(upper) = upper {
        let mut hi = f64::NEG_INFINITY;
        let mut lo = f64::INFINITY;
        for y in 0..height {
            for x in 0..width {
                let i = y * width + x;
                if comp[i] != upper {
                    continue;
                }
                let left = y * width + (x + width - 1) % width;
                let right = y * width + (x + 1) % width;
                let edge = comp[left] != upper
                    || comp[right] != upper
                    || (y > 0 && comp[i - width] != upper)
                    || (y + 1 < height && comp[i + width] != upper);
                if edge {
                    let h = -h_max + (y as f64 + 0.5) * 2.0 * h_max / height as f64;
                    hi = hi.max(h);
                    lo = lo.min(h);
                }
            }
        }
        if hi.is_finite() {
            u_h = hi;
            l_h = lo;
        }
    }
    Ok(CylinderRaster { width, height, h_max, classes, u_h, l_h, beta_re: rc.beta_re })
}

/// Tricorn centers near one normal: the critical orbit passing close to c_minus after j steps
/// seeds Newton on f^j(c_plus) = c_minus. Only centers whose period the classifier can
/// confirm (at most the period cap) are kept.
fn center_probe(base: C64, normal: C64, period: usize, family: Family, window: f64) -> Vec<Hit> {
    let cap = Tolerances::default().period_cap;
    let max_r = cap / 2;
    let n = 256;
    let lo = 1e-2 * window;
    let mut hits: Vec<Hit> = Vec::new();
    let mut tried: Vec<C64> = Vec::new();
    for k in 0..n {
        let t = lo * (window / lo).powf(k as f64 / (n - 1) as f64);
        let a = base + t * normal;
        let p = Parameter::new(family, a);
        let Ok(crit) = free_critical_points(&p) else { continue };
        let kern = MapKernel::new(p);
        let mut z = crit.c_plus;
        let mut dist = vec![f64::INFINITY; max_r + 2];
        for d in dist.iter_mut().skip(1) {
            z = kern.map(z);
            if !(z.re.is_finite() && z.im.is_finite()) {
                break;
            }
            *d = (z - crit.c_minus).norm();
        }
        for r in (period / 2 + 1)..=max_r {
            let near_min = dist[r] <= dist[r - 1] && dist[r] <= dist[r + 1];
            if !near_min || dist[r] > 0.1 {
                continue;
            }
            let Some(c) = center_newton(family, a, r) else { continue };
            if (c - base).norm() > window || tried.iter().any(|q| (q - c).norm() < 1e-9) {
                continue;
            }
            tried.push(c);
            if let Ok(cls) = classify_tier(&Parameter::new(family, c), Tier::Analysis) {
                if let ComponentType::Tricorn(q) = cls.component_type {
                    if q > period {
                        hits.push(Hit { param: c, period: q });
                    }
                }
            }
        }
    }
    hits
}

/// Classifies parameters along outward normals of the arc samples and collects what lies next to the arc.
///
/// Each normal is walked inward from `window` over geometric offsets down to 1e-6 * window.
/// Close to the arc the immediacy test gets expensive; a normal stops after two consecutive
/// undecided offsets. Principal and capture parameters alternate as the arc is approached,
/// so contact means a principal verdict in the inner half of the offsets (below 1e-3 * window).
/// Tricorn components beside the arc are far smaller than the strip spacing; they are found
/// by solving for their centers from the strip parameters.
pub fn arc_neighborhood_scan(samples: &[ArcSample], period: usize, family: Family, window: f64, offsets: usize) -> Result<ScanReport> {
    if samples.is_empty() || offsets < 2 || window.is_nan() || window <= 0.0 {
        return Err(AtlasError::InvalidArgument("scan needs samples, at least 2 offsets and a positive window".into()));
    }
    let lo = 1e-6 * window;
    let ts: Vec<f64> = (0..offsets).map(|k| lo * (window / lo).powf(k as f64 / (offsets - 1) as f64)).collect();
    let normals: Vec<C64> = samples
        .par_iter()
        .map(|s| {
            let d = ParabolicDatum::at(Parameter::new(family, s.param), period, s.parabolic_point);
            arc_normal(&d)
        })
        .collect::<Result<_>>()?;
    // per normal: (offset index, parameter, verdict), outermost first
    let walks: Vec<Vec<(usize, C64, ComponentType)>> = (0..samples.len())
        .into_par_iter()
        .map(|i| {
            let mut out = Vec::new();
            let mut open_run = 0;
            for k in (0..offsets).rev() {
                let a = samples[i].param + ts[k] * normals[i];
                let p = Parameter::new(family, a);
                if p.require_domain().is_err() {
                    continue;
                }
                let Ok(c) = classify_tier(&p, Tier::Analysis) else { continue };
                if c.component_type == ComponentType::Unknown {
                    open_run += 1;
                    if open_run >= 2 {
                        break;
                    }
                } else {
                    open_run = 0;
                }
                out.push((k, a, c.component_type));
            }
            out
        })
        .collect();
    let mut principal_contact = false;
    let mut capture_samples = Vec::new();
    let mut capture_count = 0;
    let mut tricorn_hits: Vec<Hit> = Vec::new();
    let mut mandelbrot_hits: Vec<Hit> = Vec::new();
    let mut mandel_beside = vec![false; samples.len()];
    let contact_depth = (lo * window).sqrt() * 1.000001;
    for (i, walk) in walks.iter().enumerate() {
        for &(k, a, c) in walk {
            match c {
                ComponentType::Principal if ts[k] <= contact_depth => principal_contact = true,
                ComponentType::Capture => {
                    capture_count += 1;
                    if capture_samples.len() < 16 {
                        capture_samples.push(a);
                    }
                }
                ComponentType::Tricorn(p) if p != period => tricorn_hits.push(Hit { param: a, period: p }),
                ComponentType::Mandelbrot(p) => {
                    mandel_beside[i] = true;
                    mandelbrot_hits.push(Hit { param: a, period: p });
                }
                _ => {}
            }
        }
    }
    let probes: Vec<Vec<Hit>> = (0..samples.len())
        .into_par_iter()
        .map(|i| center_probe(samples[i].param, normals[i], period, family, window))
        .collect();
    for h in probes.into_iter().flatten() {
        if !tricorn_hits.iter().any(|o| (o.param - h.param).norm() < 1e-9) {
            tricorn_hits.push(h);
        }
    }
    // longest run of Mandelbrot-free samples, ordered by height
    let mut order: Vec<usize> = (0..samples.len()).collect();
    order.sort_by(|a, b| samples[*a].h.total_cmp(&samples[*b].h));
    let (mut best, mut cur_start, mut best_len) = ((0, 0), 0, 0);
    for (pos, &i) in order.iter().enumerate() {
        if mandel_beside[i] {
            cur_start = pos + 1;
        } else if pos + 1 - cur_start > best_len {
            best_len = pos + 1 - cur_start;
            best = (cur_start, pos);
        }
    }
    let h_window = if best_len == 0 { (f64::NAN, f64::NAN) } else { (samples[order[best.0]].h, samples[order[best.1]].h) };
    Ok(ScanReport {
        arc_segment: samples.iter().map(|s| s.param).collect(),
        principal_contact,
        capture_count,
        capture_samples,
        tricorn_hits,
        mandelbrot_hits,
        h_window,
        classified: walks.iter().map(|w| w.len()).sum(),
        strips: walks
            .iter()
            .map(|w| w.iter().map(|&(k, param, component)| StripSample { offset: ts[k], param, component }).collect())
            .collect(),
    })
}

/// Boundary parabolics of the tricorn component of `center`, one per point of its boundary
/// triple where found. Rays leave the center in eight directions; each refined parabolic is
/// assigned to the triple point nearest its parabolic point, and each point keeps the closest.
pub fn boundary_arcs(center: &Parameter, period: usize, triple: &BoundaryTriple) -> Vec<Option<ParabolicDatum>> {
    let found: Vec<Option<ParabolicDatum>> = (0..8)
        .into_par_iter()
        .map(|k| {
            let d = C64::from_polar(1.0, std::f64::consts::TAU * k as f64 / 8.0);
            find_boundary_parabolic(*center, d, period).ok()
        })
        .collect();
    let mut arcs: Vec<Option<(f64, ParabolicDatum)>> = vec![None; triple.points.len()];
    for dm in found.into_iter().flatten() {
        let dist = |i: usize| (triple.points[i] - dm.parabolic_point).norm();
        let near = (0..triple.points.len()).min_by(|&a, &b| dist(a).total_cmp(&dist(b))).unwrap();
        let d = dist(near);
        if arcs[near].as_ref().is_none_or(|(best, _)| d < *best) {
            arcs[near] = Some((d, dm));
        }
    }
    arcs.into_iter().map(|a| a.map(|(_, dm)| dm)).collect()
}
