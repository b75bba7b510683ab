use super::fatou::{critical_ecalle_height_with, FatouSettings};
use super::{ArcSystem, ParabolicDatum, PetalKind, CUSP_TOL};
use crate::error::{AtlasError, Result};
use crate::family::{cstr, Parameter, C64};
use crate::orbit::{classify_tier, ComponentType, Tier};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceSettings {
    pub initial_step: f64,
    pub max_step: f64,
    pub min_step: f64,
    pub max_steps: usize,
    /// Targets are refined until the recomputed height is this close.
    pub height_tol: f64,
    /// Relative |A| (against the start) below which a stalled trace counts as a cusp.
    pub cusp_ratio: f64,
    pub fatou: FatouSettings,
}

impl Default for TraceSettings {
    fn default() -> Self {
        TraceSettings {
            initial_step: 2e-3,
            max_step: 5e-3,
            min_step: 1e-11,
            max_steps: 4000,
            height_tol: 1e-9,
            cusp_ratio: 0.05,
            fatou: FatouSettings::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArcSample {
    #[serde(with = "cstr")]
    pub param: C64,
    pub h: f64,
    #[serde(with = "cstr")]
    pub parabolic_point: C64,
    pub multiplier_residual: f64,
    pub petal_kind: PetalKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArcTrace {
    /// Samples in the order the targets were requested.
    pub samples: Vec<ArcSample>,
    /// Cusp met while tracing toward decreasing heights.
    pub cusp_low: bool,
    /// Cusp met while tracing toward increasing heights.
    pub cusp_high: bool,
    pub unreached: Vec<f64>,
    /// Parameters visited by the continuation, ordered by increasing height.
    #[serde(with = "crate::family::cstr_vec")]
    pub path: Vec<C64>,
}

impl ArcTrace {
    pub fn cusp_reached(&self) -> bool {
        self.cusp_low || self.cusp_high
    }
}

struct Node {
    x: [f64; 4],
    h: f64,
    a_norm: f64,
}

fn evaluate(sys: &ArcSystem, x: [f64; 4], fatou: &FatouSettings) -> Result<(ParabolicDatum, f64)> {
    let datum = sys.datum(x);
    let e = critical_ecalle_height_with(&datum, *fatou)?;
    Ok((datum, e.h))
}

fn sample(datum: &ParabolicDatum, h: f64) -> ArcSample {
    ArcSample {
        param: datum.param.value,
        h,
        parabolic_point: datum.parabolic_point,
        multiplier_residual: datum.multiplier_residual(),
        petal_kind: datum.petal_kind,
    }
}

fn axpy(x: [f64; 4], s: f64, t: [f64; 4]) -> [f64; 4] {
    [x[0] + s * t[0], x[1] + s * t[1], x[2] + s * t[2], x[3] + s * t[3]]
}

/// Samples found with their target, whether a cusp ended the run, and the visited parameters.
type Sweep = (Vec<(f64, ArcSample)>, bool, Vec<C64>);

/// Continues along the arc from `start` in the direction where h moves by `dir`, collecting
/// the targets in order.
fn sweep(
    sys: &ArcSystem,
    start: &Node,
    dir: f64,
    targets: &[f64],
    a_start: f64,
    settings: &TraceSettings,
) -> Result<Sweep> {
    let mut found = Vec::new();
    let mut path = Vec::new();
    let mut pending: Vec<f64> = targets.to_vec();
    pending.sort_by(|a, b| (dir * a).total_cmp(&(dir * b)));
    if pending.is_empty() {
        return Ok((found, false, path));
    }
    let mut t = sys
        .tangent(start.x, None)
        .ok_or_else(|| AtlasError::ContinuationStalled("singular arc jacobian at start".into()))?;
    // orient the tangent along increasing dir*h
    let probe = 1e-4;
    let xp = sys
        .correct(axpy(start.x, probe, t), t)
        .ok_or_else(|| AtlasError::ContinuationStalled("corrector failed at start".into()))?;
    let (_, hp) = evaluate(sys, xp, &settings.fatou)?;
    if (hp - start.h) * dir < 0.0 {
        t = t.map(|v| -v);
    }
    let mut cur = Node { x: start.x, h: start.h, a_norm: start.a_norm };
    let mut step = settings.initial_step;
    for _ in 0..settings.max_steps {
        if pending.is_empty() {
            return Ok((found, false, path));
        }
        if step < settings.min_step {
            if cur.a_norm < settings.cusp_ratio * a_start {
                return Ok((found, true, path));
            }
            return Err(AtlasError::ContinuationStalled(format!("step underflow at h = {}", cur.h)));
        }
        let Some(xn) = sys.correct(axpy(cur.x, step, t), t) else {
            step *= 0.5;
            continue;
        };
        let moved = (0..4).map(|k| (xn[k] - cur.x[k]).powi(2)).sum::<f64>().sqrt();
        if moved > 1.5 * step {
            step *= 0.5;
            continue;
        }
        let (datum, hn) = match evaluate(sys, xn, &settings.fatou) {
            Ok(v) => v,
            Err(_) => {
                step *= 0.5;
                continue;
            }
        };
        let an = datum.local_coeffs.a.norm();
        if an < CUSP_TOL || datum.petal_kind == PetalKind::Cusp {
            return Ok((found, true, path));
        }
        let dh = (hn - cur.h) * dir;
        if dh < 0.0 {
            // heights run to infinity at a cusp; a reversal means we stepped across one
            if cur.h.abs() > 5.0 && cur.a_norm < 0.5 * a_start {
                return Ok((found, true, path));
            }
            step *= 0.5;
            continue;
        }
        if dh > 0.5 + 0.1 * cur.h.abs() {
            // keep height increments moderate so targets are bracketed tightly
            step *= 0.5;
            continue;
        }
        while let Some(&target) = pending.first() {
            if (target - cur.h) * dir >= 0.0 && (hn - target) * dir >= 0.0 {
                let (d, h) = refine_target(sys, &cur, t, step, target, hn, settings)?;
                found.push((target, sample(&d, h)));
                pending.remove(0);
            } else {
                break;
            }
        }
        let tn = sys
            .tangent(xn, Some(t))
            .ok_or_else(|| AtlasError::ContinuationStalled("singular arc jacobian".into()))?;
        path.push(C64::new(xn[2], xn[3]));
        cur = Node { x: xn, h: hn, a_norm: an };
        t = tn;
        step = (step * 1.5).min(settings.max_step);
    }
    Err(AtlasError::ContinuationStalled("step budget exhausted".into()))
}

/// Finds the arc point with height `target` between cur (at offset 0) and offset `step`.
fn refine_target(
    sys: &ArcSystem,
    cur: &Node,
    t: [f64; 4],
    step: f64,
    target: f64,
    h_hi: f64,
    settings: &TraceSettings,
) -> Result<(ParabolicDatum, f64)> {
    let (mut lo, mut hi) = (0.0, step);
    let (mut f_lo, mut f_hi) = (cur.h - target, h_hi - target);
    let mut best: Option<(ParabolicDatum, f64)> = None;
    for it in 0..80 {
        // regula falsi with bisection fallback every third step
        let mut s = if (f_hi - f_lo).abs() > 0.0 { lo - f_lo * (hi - lo) / (f_hi - f_lo) } else { 0.5 * (lo + hi) };
        if it % 3 == 2 || !(s > lo && s < hi) {
            s = 0.5 * (lo + hi);
        }
        let x = sys
            .correct(axpy(cur.x, s, t), t)
            .ok_or_else(|| AtlasError::ContinuationStalled("corrector failed during target refinement".into()))?;
        let (d, h) = evaluate(sys, x, &settings.fatou)?;
        let f = h - target;
        let done = f.abs() < settings.height_tol || hi - lo < 1e-15;
        best = Some((d, h));
        if done {
            break;
        }
        if (f < 0.0) == (f_lo < 0.0) {
            lo = s;
            f_lo = f;
        } else {
            hi = s;
            f_hi = f;
        }
    }
    best.ok_or_else(|| AtlasError::ContinuationStalled("target refinement failed".into()))
}

/// Traces the parabolic arc through `start` and returns one sample per reachable target
/// height. Infinite targets are never reached and run the trace to the cusp on that side.
pub fn trace_arc(start: &ParabolicDatum, h_targets: &[f64], settings: &TraceSettings) -> Result<ArcTrace> {
    start.require_simple()?;
    if h_targets.iter().any(|h| h.is_nan()) {
        return Err(AtlasError::InvalidArgument("NaN height target".into()));
    }
    let sys = ArcSystem::new(start.param.family, start.period);
    let h0 = critical_ecalle_height_with(start, settings.fatou)?.h;
    let a0 = start.local_coeffs.a.norm();
    let node = Node { x: start.state(), h: h0, a_norm: a0 };
    let mut results: Vec<(f64, ArcSample)> = Vec::new();
    let mut at_start = Vec::new();
    let mut up = Vec::new();
    let mut down = Vec::new();
    for &h in h_targets {
        if (h - h0).abs() <= settings.height_tol {
            at_start.push(h);
        } else if h > h0 {
            up.push(h);
        } else {
            down.push(h);
        }
    }
    for h in at_start {
        results.push((h, sample(start, h0)));
    }
    let (found_up, cusp_high, path_up) = sweep(&sys, &node, 1.0, &up, a0, settings)?;
    let (found_down, cusp_low, path_down) = sweep(&sys, &node, -1.0, &down, a0, settings)?;
    let mut path: Vec<C64> = path_down.into_iter().rev().collect();
    path.push(start.param.value);
    path.extend(path_up);
    results.extend(found_up);
    results.extend(found_down);
    let mut samples = Vec::new();
    let mut unreached = Vec::new();
    for &h in h_targets {
        match results.iter().position(|(t, _)| *t == h) {
            Some(i) => samples.push(results.remove(i).1),
            None => unreached.push(h),
        }
    }
    Ok(ArcTrace { samples, cusp_low, cusp_high, unreached, path })
}

/// Unit normal to the arc in the parameter plane, pointing out of the tricorn component.
pub fn arc_normal(datum: &ParabolicDatum) -> Result<C64> {
    let sys = ArcSystem::new(datum.param.family, datum.period);
    let t = sys
        .tangent(datum.state(), None)
        .ok_or_else(|| AtlasError::ContinuationStalled("singular arc jacobian".into()))?;
    let tan = C64::new(t[2], t[3]);
    if tan.norm() < 1e-12 {
        return Err(AtlasError::ContinuationStalled("arc tangent has no parameter component".into()));
    }
    let nu = C64::new(0.0, 1.0) * tan / tan.norm();
    let probe = Parameter::new(datum.param.family, datum.param.value + 1e-4 * nu);
    let inside = matches!(classify_tier(&probe, Tier::Analysis), Ok(c) if c.component_type == ComponentType::Tricorn(datum.period));
    Ok(if inside { -nu } else { nu })
}
