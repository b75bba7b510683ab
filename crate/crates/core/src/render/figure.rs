//! Batch reproduction of the standard figures with overlays.

use super::{render_dynamical, render_parameter, PixelClass, RenderMeta, Rendered, Viewport};
use crate::error::{AtlasError, Result};
use crate::family::{cstr, cstr_vec, Family, Parameter, C64};
use crate::orbit::{center_search_antipodal, center_search_newton, quadrant_seed_grid, Tier};
use crate::parabolic::{find_boundary_parabolic, trace_arc, TraceSettings};
use crate::visibility::{boundary_arcs, coroot_visibility, half_return_boundary_points, BoundaryTriple, RootTag, VisibilityState};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};

pub const FIGURE_IDS: &[&str] = &["fig-region", "fig-newton-overview", "fig-tricorn-n2", "fig-invisible-zoom", "fig-antipodal-tongue2"];

const TICK_HEIGHTS: [f64; 7] = [-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArcOverlay {
    #[serde(with = "cstr_vec")]
    pub path: Vec<C64>,
    pub ticks: Vec<Tick>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tick {
    #[serde(with = "cstr")]
    pub param: C64,
    pub h: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TripleMarker {
    #[serde(with = "cstr")]
    pub point: C64,
    pub tag: RootTag,
    pub state: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Overlays {
    pub region_hyperbola: bool,
    pub arcs: Vec<ArcOverlay>,
    pub triple: Vec<TripleMarker>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FigureMeta {
    pub figure: String,
    pub panel: String,
    #[serde(flatten)]
    pub render: RenderMeta,
    pub overlays: Overlays,
}

/// Agreement between the rendered OutsideDomain boundary and the branch 2 Im(a)^2 = Re(a)^2 + 2, Im(a) > 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperbolaAgreement {
    /// Fraction of curve length (inside the view) with a class change within `tol_px`.
    pub curve_fraction: f64,
    /// Fraction of rendered boundary pixels within `tol_px` of the curve.
    pub boundary_fraction: f64,
    pub curve_samples: usize,
    pub boundary_pixels: usize,
}

pub fn hyperbola_agreement(r: &Rendered, tol_px: f64) -> HyperbolaAgreement {
    let vp = r.meta.viewport;
    let (w, h) = (vp.width as i64, vp.height as i64);
    let outside = |x: i64, y: i64| r.class_at(x as usize, y as usize) == PixelClass::OutsideDomain;
    let reach = tol_px.ceil() as i64;
    // walk the upper branch in plane steps of a quarter pixel
    let x_lo = vp.center.re - vp.scale * vp.width as f64;
    let x_hi = vp.center.re + vp.scale * vp.width as f64;
    let (mut hits, mut total) = (0usize, 0usize);
    let mut x = x_lo;
    while x <= x_hi {
        let z = C64::new(x, ((x * x + 2.0) / 2.0).sqrt());
        let (px, py) = vp.plane_to_pixel(z);
        let (cx, cy) = (px.round() as i64, py.round() as i64);
        if cx >= reach && cy >= reach && cx < w - reach && cy < h - reach {
            total += 1;
            let mut seen = (false, false);
            for dy in -reach..=reach {
                for dx in -reach..=reach {
                    if outside(cx + dx, cy + dy) {
                        seen.0 = true;
                    } else {
                        seen.1 = true;
                    }
                }
            }
            if seen.0 && seen.1 {
                hits += 1;
            }
        }
        // arc length per unit x is sqrt(1 + y'^2) with y' = x / (2y)
        let slope = x / (2.0 * z.im);
        x += 0.25 * vp.scale / (1.0 + slope * slope).sqrt();
    }
    let (mut near, mut border) = (0usize, 0usize);
    for y in 0..h {
        for x in 0..w {
            if !outside(x, y) {
                continue;
            }
            let nb = [(x - 1, y), (x + 1, y), (x, y - 1), (x, y + 1)];
            if !nb.iter().any(|&(a, b)| a >= 0 && b >= 0 && a < w && b < h && !outside(a, b)) {
                continue;
            }
            border += 1;
            let z = vp.pixel_to_plane(x as usize, y as usize);
            // first-order distance to the zero set of g = 2y^2 - x^2 - 2
            let g = 2.0 * z.im * z.im - z.re * z.re - 2.0;
            let grad = (4.0 * z.re * z.re + 16.0 * z.im * z.im).sqrt();
            if g.abs() / grad / vp.scale <= tol_px + 0.5 {
                near += 1;
            }
        }
    }
    HyperbolaAgreement {
        curve_fraction: if total == 0 { 0.0 } else { hits as f64 / total as f64 },
        boundary_fraction: if border == 0 { 0.0 } else { near as f64 / border as f64 },
        curve_samples: total,
        boundary_pixels: border,
    }
}

fn put(img: &mut [u8], vp: &Viewport, x: i64, y: i64, c: [u8; 4]) {
    if x >= 0 && y >= 0 && (x as usize) < vp.width && (y as usize) < vp.height {
        let i = 4 * (y as usize * vp.width + x as usize);
        img[i..i + 4].copy_from_slice(&c);
    }
}

fn draw_polyline(img: &mut [u8], vp: &Viewport, pts: &[C64], c: [u8; 4]) {
    for seg in pts.windows(2) {
        let (x0, y0) = vp.plane_to_pixel(seg[0]);
        let (x1, y1) = vp.plane_to_pixel(seg[1]);
        let n = ((x1 - x0).abs().max((y1 - y0).abs()) * 2.0).ceil().clamp(1.0, 1e5) as usize;
        for k in 0..=n {
            let t = k as f64 / n as f64;
            put(img, vp, (x0 + t * (x1 - x0)).round() as i64, (y0 + t * (y1 - y0)).round() as i64, c);
        }
    }
}

fn draw_cross(img: &mut [u8], vp: &Viewport, z: C64, arm: i64, c: [u8; 4]) {
    let (x, y) = vp.plane_to_pixel(z);
    let (x, y) = (x.round() as i64, y.round() as i64);
    for d in -arm..=arm {
        put(img, vp, x + d, y, c);
        put(img, vp, x, y + d, c);
    }
}

const WHITE: [u8; 4] = [255, 255, 255, 255];
const BLACK: [u8; 4] = [0, 0, 0, 255];
const CYAN: [u8; 4] = [0, 230, 230, 255];

fn draw_overlays(r: &mut Rendered, o: &Overlays) {
    let vp = r.meta.viewport;
    if o.region_hyperbola {
        let pts: Vec<C64> = (0..=2000)
            .map(|k| {
                let x = vp.center.re + vp.scale * vp.width as f64 * (k as f64 / 2000.0 - 0.5);
                C64::new(x, ((x * x + 2.0) / 2.0).sqrt())
            })
            .collect();
        draw_polyline(&mut r.rgba, &vp, &pts, WHITE);
    }
    for arc in &o.arcs {
        draw_polyline(&mut r.rgba, &vp, &arc.path, WHITE);
        for t in &arc.ticks {
            draw_cross(&mut r.rgba, &vp, t.param, 3, CYAN);
        }
    }
    for m in &o.triple {
        let c = if m.state == "Invisible" { BLACK } else { WHITE };
        draw_cross(&mut r.rgba, &vp, m.point, 5, c);
    }
}

fn arc_overlay(dm: &crate::parabolic::ParabolicDatum) -> Option<ArcOverlay> {
    let tr = trace_arc(dm, &TICK_HEIGHTS, &TraceSettings::default()).ok()?;
    let ticks = tr.samples.iter().map(|s| Tick { param: s.param, h: s.h }).collect();
    Some(ArcOverlay { path: tr.path, ticks })
}

fn triple_markers(param: &Parameter, triple: &BoundaryTriple) -> Vec<TripleMarker> {
    triple
        .points
        .iter()
        .zip(&triple.tags)
        .map(|(&p, &tag)| {
            let state = match tag {
                RootTag::Root => "Root".to_string(),
                RootTag::CoRoot => match coroot_visibility(param, p) {
                    Ok(v) => match v.state {
                        VisibilityState::Visible { .. } => "Visible".into(),
                        VisibilityState::Invisible { .. } => "Invisible".into(),
                        VisibilityState::Undecided { .. } => "Undecided".into(),
                    },
                    Err(e) => format!("error: {e}"),
                },
            };
            TripleMarker { point: p, tag, state }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FigureOptions {
    /// Side of the square rasters.
    pub size: usize,
    /// Overrides each figure's own tier.
    pub tier: Option<Tier>,
}

impl Default for FigureOptions {
    fn default() -> Self {
        FigureOptions { size: 512, tier: None }
    }
}

fn write_panel(outdir: &Path, figure: &str, panel: &str, mut r: Rendered, overlays: Overlays) -> Result<Vec<PathBuf>> {
    draw_overlays(&mut r, &overlays);
    let stem = if panel.is_empty() { figure.to_string() } else { format!("{figure}-{panel}") };
    let png = outdir.join(format!("{stem}.png"));
    let meta = outdir.join(format!("{stem}.meta.json"));
    fs::write(&png, r.png()?)?;
    let doc = FigureMeta { figure: figure.into(), panel: panel.into(), render: r.meta.clone(), overlays };
    fs::write(&meta, serde_json::to_string_pretty(&doc).expect("meta serializes"))?;
    Ok(vec![png, meta])
}

fn a2_center() -> Result<Parameter> {
    let rep = center_search_newton(2, (1.001, 10.0))?;
    let a = rep
        .centers
        .iter()
        .copied()
        .max_by(|x, y| x.im.total_cmp(&y.im))
        .ok_or_else(|| AtlasError::NoRootInRange("no period-4 center on the symmetry locus".into()))?;
    Ok(Parameter::newton(a))
}

pub fn figure_command(figure_id: &str, outdir: &Path) -> Result<Vec<PathBuf>> {
    figure_with(figure_id, outdir, &FigureOptions::default())
}

pub fn figure_with(figure_id: &str, outdir: &Path, opt: &FigureOptions) -> Result<Vec<PathBuf>> {
    if !FIGURE_IDS.contains(&figure_id) {
        return Err(AtlasError::UnknownFigure { id: figure_id.into(), valid: FIGURE_IDS.join(", ") });
    }
    fs::create_dir_all(outdir)?;
    let n = opt.size;
    let tier = |t: Tier| opt.tier.unwrap_or(t);
    match figure_id {
        "fig-region" => {
            let vp = Viewport::new(C64::new(0.0, 2.5), 8.0 / n as f64, n, n)?;
            let r = render_parameter(Family::NewtonQuartic, &vp, tier(Tier::Preview), false)?;
            write_panel(outdir, figure_id, "", r, Overlays { region_hyperbola: true, ..Default::default() })
        }
        "fig-newton-overview" => {
            let vp = Viewport::new(C64::new(0.0, 2.0), 8.0 / n as f64, n, n)?;
            let r = render_parameter(Family::NewtonQuartic, &vp, tier(Tier::Standard), false)?;
            write_panel(outdir, figure_id, "", r, Overlays { region_hyperbola: true, ..Default::default() })
        }
        "fig-tricorn-n2" => {
            let center = a2_center()?;
            let triple = half_return_boundary_points(&center)?;
            let arcs: Vec<ArcOverlay> = boundary_arcs(&center, 4, &triple).iter().flatten().filter_map(arc_overlay).collect();
            let vp = Viewport::new(center.value, 0.06 / n as f64, n, n)?;
            let r = render_parameter(Family::NewtonQuartic, &vp, tier(Tier::Standard), false)?;
            let mut files = write_panel(outdir, figure_id, "param", r, Overlays { arcs, ..Default::default() })?;
            let dv = Viewport::new(C64::new(0.0, 1.5), 6.0 / n as f64, n, n)?;
            let d = render_dynamical(&center, &dv, tier(Tier::Standard))?;
            let triple = triple_markers(&center, &triple);
            files.extend(write_panel(outdir, figure_id, "dyn", d, Overlays { triple, ..Default::default() })?);
            Ok(files)
        }
        "fig-invisible-zoom" => {
            let center = a2_center()?;
            // the arc through the symmetric co-root crosses the symmetry locus below the center
            let dm = find_boundary_parabolic(center, C64::new(0.0, -1.0), 4)?;
            let arcs: Vec<ArcOverlay> = arc_overlay(&dm).into_iter().collect();
            let vp = Viewport::new(dm.param.value, 4e-3 / n as f64, n, n)?;
            let r = render_parameter(Family::NewtonQuartic, &vp, tier(Tier::Standard), false)?;
            write_panel(outdir, figure_id, "", r, Overlays { arcs, ..Default::default() })
        }
        "fig-antipodal-tongue2" => {
            let rep = center_search_antipodal(1, &quadrant_seed_grid(5))?;
            let q = *rep.centers.first().ok_or_else(|| AtlasError::NoRootInRange("no period-2 antipodal center".into()))?;
            let center = Parameter::antipodal(q);
            let triple = half_return_boundary_points(&center)?;
            let arcs: Vec<ArcOverlay> = boundary_arcs(&center, 2, &triple).iter().flatten().filter_map(arc_overlay).collect();
            let vp = Viewport::new(q, 2.0 / n as f64, n, n)?;
            let r = render_parameter(Family::AntipodalCubic, &vp, tier(Tier::Standard), false)?;
            let mut files = write_panel(outdir, figure_id, "param", r, Overlays { arcs, ..Default::default() })?;
            let dv = Viewport::new(C64::new(0.0, 1.0), 6.0 / n as f64, n, n)?;
            let d = render_dynamical(&center, &dv, tier(Tier::Standard))?;
            let triple = triple_markers(&center, &triple);
            files.extend(write_panel(outdir, figure_id, "dyn", d, Overlays { triple, ..Default::default() })?);
            Ok(files)
        }
        _ => unreachable!("checked against FIGURE_IDS"),
    }
}
