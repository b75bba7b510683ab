//! Deterministic raster rendering of parameter planes and dynamical planes.

mod cache;
mod figure;
mod palette;

pub use cache::TileCache;
pub use figure::{figure_command, figure_with, hyperbola_agreement, FigureMeta, FigureOptions, HyperbolaAgreement, Overlays, FIGURE_IDS};
pub use palette::{Palette, PALETTE_VERSION};

use crate::basin::{BasinClassifier, PointClass};
use crate::error::{AtlasError, Result};
use crate::family::{cstr, format_complex, Family, Parameter, C64};
use crate::orbit::{classify_tier, ComponentType, OrbitClassification, OrbitKind, Target, Tier};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;

pub const TILE_SIZE: usize = 256;
pub const MAX_SIDE: usize = 4096;
/// Tiles at or beyond this zoom re-run undecided boundary pixels at the next tier.
pub const ESCALATE_ZOOM: u32 = 6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Viewport {
    #[serde(with = "cstr")]
    pub center: C64,
    /// Plane units per pixel.
    pub scale: f64,
    pub width: usize,
    pub height: usize,
}

impl Viewport {
    pub fn new(center: C64, scale: f64, width: usize, height: usize) -> Result<Self> {
        let v = Viewport { center, scale, width, height };
        v.validate()?;
        Ok(v)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(AtlasError::InvalidArgument(format!("scale must be positive, got {}", self.scale)));
        }
        if !(self.center.re.is_finite() && self.center.im.is_finite()) {
            return Err(AtlasError::InvalidArgument("viewport center is not finite".into()));
        }
        for side in [self.width, self.height] {
            if side == 0 || side > MAX_SIDE {
                return Err(AtlasError::InvalidArgument(format!("image side {side} outside [1, {MAX_SIDE}]")));
            }
        }
        Ok(())
    }

    /// Plane coordinate of the pixel center; rows grow downward.
    pub fn pixel_to_plane(&self, x: usize, y: usize) -> C64 {
        let dx = x as f64 + 0.5 - self.width as f64 / 2.0;
        let dy = y as f64 + 0.5 - self.height as f64 / 2.0;
        self.center + C64::new(dx * self.scale, -dy * self.scale)
    }

    /// Continuous pixel coordinates (x, y) of a plane point.
    pub fn plane_to_pixel(&self, z: C64) -> (f64, f64) {
        let d = (z - self.center) / self.scale;
        (d.re + self.width as f64 / 2.0 - 0.5, -d.im + self.height as f64 / 2.0 - 0.5)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorldSquare {
    #[serde(with = "cstr")]
    pub center: C64,
    pub half_width: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorldConfig {
    pub newton: WorldSquare,
    pub antipodal: WorldSquare,
    /// Dynamical planes of both families.
    pub dynamical: WorldSquare,
    pub max_zoom: u32,
}

impl Default for WorldConfig {
    fn default() -> Self {
        WorldConfig {
            newton: WorldSquare { center: C64::new(0.0, 2.0), half_width: 4.0 },
            antipodal: WorldSquare { center: C64::new(0.0, 0.0), half_width: 4.0 },
            dynamical: WorldSquare { center: C64::new(0.0, 0.0), half_width: 4.0 },
            max_zoom: 40,
        }
    }
}

impl WorldConfig {
    pub fn square(&self, family: Family, plane: &Plane) -> WorldSquare {
        match (plane, family) {
            (Plane::Dynamical { .. }, _) => self.dynamical,
            (Plane::Parameter, Family::NewtonQuartic) => self.newton,
            (Plane::Parameter, Family::AntipodalCubic) => self.antipodal,
        }
    }

    /// Hex SHA-256 of the canonical JSON form together with the palette version.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(self).expect("config serializes"));
        h.update(PALETTE_VERSION.to_le_bytes());
        hex(&h.finalize())
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "plane", rename_all = "lowercase")]
pub enum Plane {
    Parameter,
    Dynamical {
        #[serde(with = "cstr")]
        anchor: C64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TileKey {
    pub family: Family,
    #[serde(flatten)]
    pub plane: Plane,
    pub zoom: u32,
    pub x: u64,
    pub y: u64,
    pub tier: Tier,
}

impl TileKey {
    pub fn viewport(&self, world: &WorldConfig) -> Result<Viewport> {
        if self.zoom > 62 {
            return Err(AtlasError::OutOfWorld(format!("zoom {}", self.zoom)));
        }
        let n = 1u64 << self.zoom;
        if self.x >= n || self.y >= n {
            return Err(AtlasError::OutOfWorld(format!("tile {}/{}/{} with {} tiles per side", self.zoom, self.x, self.y, n)));
        }
        let sq = world.square(self.family, &self.plane);
        let n = n as f64;
        let cx = -1.0 + (2.0 * self.x as f64 + 1.0) / n;
        let cy = 1.0 - (2.0 * self.y as f64 + 1.0) / n;
        let center = sq.center + sq.half_width * C64::new(cx, cy);
        Viewport::new(center, 2.0 * sq.half_width / (n * TILE_SIZE as f64), TILE_SIZE, TILE_SIZE)
    }

    /// Canonical text form used for cache names and validators.
    pub fn canonical(&self) -> String {
        let plane = match self.plane {
            Plane::Parameter => "param".to_string(),
            Plane::Dynamical { anchor } => format!("dyn@{}", format_complex(anchor)),
        };
        format!("{}/{}/{}/{}/{}/{}", self.family, plane, self.zoom, self.x, self.y, self.tier)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PixelClass {
    Principal(Target),
    Capture(Target),
    Mandelbrot(usize),
    Tricorn(usize),
    Undecided,
    OutsideDomain,
    /// Dynamical plane: basin of a superattracting fixed point.
    Basin(Target),
    /// Dynamical plane: basin of the attracting cycle, by slot.
    CycleSlot(usize),
    /// Dynamical plane: no decision within the budget.
    Julia,
}

impl PixelClass {
    pub fn from_classification(c: &OrbitClassification) -> Self {
        match (&c.kind, c.component_type) {
            (OrbitKind::FixedBasin { target, .. }, ComponentType::Principal) => PixelClass::Principal(*target),
            (OrbitKind::FixedBasin { target, .. }, _) => PixelClass::Capture(*target),
            (_, ComponentType::Mandelbrot(p)) => PixelClass::Mandelbrot(p),
            (_, ComponentType::Tricorn(p)) => PixelClass::Tricorn(p),
            _ => PixelClass::Undecided,
        }
    }

    pub fn label(&self) -> String {
        match self {
            PixelClass::Principal(t) => format!("principal:{}", t.label()),
            PixelClass::Capture(t) => format!("capture:{}", t.label()),
            PixelClass::Mandelbrot(p) => format!("mandelbrot:{p}"),
            PixelClass::Tricorn(p) => format!("tricorn:{p}"),
            PixelClass::Undecided => "undecided".into(),
            PixelClass::OutsideDomain => "outside-domain".into(),
            PixelClass::Basin(t) => format!("basin:{}", t.label()),
            PixelClass::CycleSlot(s) => format!("slot:{s}"),
            PixelClass::Julia => "julia".into(),
        }
    }

    pub fn period(&self) -> Option<usize> {
        match self {
            PixelClass::Mandelbrot(p) | PixelClass::Tricorn(p) => Some(*p),
            _ => None,
        }
    }

    fn is_open(&self) -> bool {
        matches!(self, PixelClass::Undecided | PixelClass::Julia)
    }
}

/// Parameter-plane class of one parameter at the given tier.
pub fn classify_pixel(param: &Parameter, tier: Tier) -> PixelClass {
    if param.family == Family::NewtonQuartic && !param.in_u {
        return PixelClass::OutsideDomain;
    }
    match classify_tier(param, tier) {
        Ok(c) => PixelClass::from_classification(&c),
        Err(AtlasError::OutsideDomain(_)) => PixelClass::OutsideDomain,
        Err(_) => PixelClass::Undecided,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RenderMeta {
    pub family: Family,
    #[serde(flatten)]
    pub plane: Plane,
    pub viewport: Viewport,
    pub tier: Tier,
    pub palette_version: u32,
    pub class_histogram: BTreeMap<String, u64>,
    pub max_period: usize,
    /// Classifier verdict of the anchor; dynamical renders only.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub anchor_class: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Rendered {
    pub classes: Vec<PixelClass>,
    pub rgba: Vec<u8>,
    pub meta: RenderMeta,
}

impl Rendered {
    pub fn class_at(&self, x: usize, y: usize) -> PixelClass {
        self.classes[y * self.meta.viewport.width + x]
    }

    pub fn png(&self) -> Result<Vec<u8>> {
        encode_png(self.meta.viewport.width, self.meta.viewport.height, &self.rgba)
    }

    pub fn meta_json(&self) -> String {
        serde_json::to_string_pretty(&self.meta).expect("meta serializes")
    }
}

pub fn encode_png(width: usize, height: usize, rgba: &[u8]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, width as u32, height as u32);
        enc.set_color(png::ColorType::Rgba);
        enc.set_depth(png::BitDepth::Eight);
        let mut w = enc.write_header().map_err(|e| AtlasError::Io(e.to_string()))?;
        w.write_image_data(rgba).map_err(|e| AtlasError::Io(e.to_string()))?;
    }
    Ok(out)
}

fn next_tier(t: Tier) -> Option<Tier> {
    match t {
        Tier::Preview => Some(Tier::Standard),
        Tier::Standard => Some(Tier::Analysis),
        Tier::Analysis => None,
    }
}

/// Re-runs open pixels that touch a decided pixel at the next tier.
fn escalate(classes: &mut [PixelClass], vp: &Viewport, tier: Tier, f: impl Fn(C64, Tier) -> PixelClass + Sync) {
    let Some(up) = next_tier(tier) else { return };
    let (w, h) = (vp.width, vp.height);
    let border: Vec<usize> = (0..classes.len())
        .filter(|&i| {
            if !classes[i].is_open() {
                return false;
            }
            let (x, y) = (i % w, i / w);
            let mut nb = Vec::with_capacity(4);
            if x > 0 {
                nb.push(i - 1);
            }
            if x + 1 < w {
                nb.push(i + 1);
            }
            if y > 0 {
                nb.push(i - w);
            }
            if y + 1 < h {
                nb.push(i + w);
            }
            nb.iter().any(|&j| !classes[j].is_open())
        })
        .collect();
    let redone: Vec<PixelClass> = border.par_iter().map(|&i| f(vp.pixel_to_plane(i % w, i / w), up)).collect();
    for (i, c) in border.into_iter().zip(redone) {
        classes[i] = c;
    }
}

fn finish(classes: Vec<PixelClass>, family: Family, plane: Plane, viewport: Viewport, tier: Tier, palette: &Palette) -> Rendered {
    let mut class_histogram = BTreeMap::new();
    let mut max_period = 0;
    for c in &classes {
        *class_histogram.entry(c.label()).or_insert(0) += 1;
        max_period = max_period.max(c.period().unwrap_or(0));
    }
    let rgba = classes.iter().flat_map(|c| palette.color(c)).collect();
    let meta = RenderMeta {
        family,
        plane,
        viewport,
        tier,
        palette_version: palette.version,
        class_histogram,
        max_period,
        anchor_class: None,
    };
    Rendered { classes, rgba, meta }
}

/// Classifies every pixel of the viewport as a parameter of `family`.
pub fn render_parameter(family: Family, viewport: &Viewport, tier: Tier, escalate_boundary: bool) -> Result<Rendered> {
    viewport.validate()?;
    let f = |z: C64, t: Tier| classify_pixel(&Parameter::new(family, z), t);
    let mut classes: Vec<PixelClass> = (0..viewport.width * viewport.height)
        .into_par_iter()
        .map(|i| f(viewport.pixel_to_plane(i % viewport.width, i / viewport.width), tier))
        .collect();
    if escalate_boundary {
        escalate(&mut classes, viewport, tier, f);
    }
    Ok(finish(classes, family, Plane::Parameter, *viewport, tier, &Palette::current()))
}

fn dyn_class(c: PointClass) -> PixelClass {
    match c {
        PointClass::Target(t) => PixelClass::Basin(t),
        PointClass::Slot(s) => PixelClass::CycleSlot(s),
        PointClass::Undecided => PixelClass::Julia,
    }
}

/// Per-point budget of dynamical renders: a tenth of the tier budget.
pub fn dynamical_budget(tier: Tier) -> usize {
    tier.budget() / 10
}

/// Basin picture of the map at `anchor`; the attracting cycle, if any, comes from the classifier.
pub fn render_dynamical(anchor: &Parameter, viewport: &Viewport, tier: Tier) -> Result<Rendered> {
    viewport.validate()?;
    anchor.require_domain()?;
    let verdict = classify_tier(anchor, tier)?;
    let cycle = verdict.cycle().map(|c| c.points.clone()).unwrap_or_default();
    let cls = BasinClassifier::new(*anchor, cycle, dynamical_budget(tier));
    let classes: Vec<PixelClass> = (0..viewport.width * viewport.height)
        .into_par_iter()
        .map(|i| dyn_class(cls.classify(viewport.pixel_to_plane(i % viewport.width, i / viewport.width)).0))
        .collect();
    let plane = Plane::Dynamical { anchor: anchor.value };
    let mut out = finish(classes, anchor.family, plane, *viewport, tier, &Palette::current());
    out.meta.anchor_class = Some(PixelClass::from_classification(&verdict).label());
    Ok(out)
}

/// Pixels of a 256 x 256 tile.
pub fn render_tile(key: &TileKey, world: &WorldConfig) -> Result<Rendered> {
    if key.zoom > world.max_zoom {
        return Err(AtlasError::InvalidArgument(format!("zoom {} beyond max {}", key.zoom, world.max_zoom)));
    }
    let vp = key.viewport(world)?;
    match key.plane {
        Plane::Parameter => render_parameter(key.family, &vp, key.tier, key.zoom >= ESCALATE_ZOOM),
        Plane::Dynamical { anchor } => render_dynamical(&Parameter::new(key.family, anchor), &vp, key.tier),
    }
}

/// Strong validator for a tile: hash of key, palette version and config.
pub fn tile_etag(key: &TileKey, world: &WorldConfig) -> String {
    let mut h = Sha256::new();
    h.update(key.canonical().as_bytes());
    h.update(PALETTE_VERSION.to_le_bytes());
    h.update(world.hash().as_bytes());
    format!("\"{}\"", hex(&h.finalize()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn viewport_round_trip() {
        let v = Viewport::new(C64::new(1.0, -2.0), 0.01, 300, 200).unwrap();
        for (x, y) in [(0, 0), (299, 199), (17, 150)] {
            let (px, py) = v.plane_to_pixel(v.pixel_to_plane(x, y));
            assert!((px - x as f64).abs() < 1e-9 && (py - y as f64).abs() < 1e-9);
        }
        assert!(Viewport::new(C64::new(0.0, 0.0), 0.0, 10, 10).is_err());
        assert!(Viewport::new(C64::new(0.0, 0.0), 1.0, 0, 10).is_err());
        assert!(Viewport::new(C64::new(0.0, 0.0), 1.0, 10, 4097).is_err());
    }

    #[test]
    fn zoom_zero_tile_covers_the_world() {
        let w = WorldConfig::default();
        let key = TileKey { family: Family::NewtonQuartic, plane: Plane::Parameter, zoom: 0, x: 0, y: 0, tier: Tier::Preview };
        let vp = key.viewport(&w).unwrap();
        assert_eq!(vp.center, C64::new(0.0, 2.0));
        assert!((vp.scale * 256.0 - 8.0).abs() < 1e-12);
        let off = TileKey { x: 1, ..key };
        assert!(matches!(off.viewport(&w), Err(AtlasError::OutOfWorld(_))));
    }

    #[test]
    fn child_tiles_tile_the_parent() {
        let w = WorldConfig::default();
        let parent = TileKey { family: Family::AntipodalCubic, plane: Plane::Parameter, zoom: 2, x: 1, y: 3, tier: Tier::Preview };
        let pv = parent.viewport(&w).unwrap();
        let child = TileKey { zoom: 3, x: 2, y: 6, ..parent };
        let cv = child.viewport(&w).unwrap();
        // top-left corners coincide
        let pc = pv.center + pv.scale * C64::new(-128.0, 128.0);
        let cc = cv.center + cv.scale * C64::new(-128.0, 128.0);
        assert!((pc - cc).norm() < 1e-12);
    }
}
