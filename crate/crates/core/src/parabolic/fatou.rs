use super::ParabolicDatum;
use crate::error::{AtlasError, Result};
use crate::family::{cstr, free_critical_points, MapKernel, C64};
use crate::jet::{Jet, ORDER};
use crate::orbit::Target;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FatouSettings {
    /// Escape radius in the u-coordinate where the asymptotic series takes over.
    pub radius: f64,
    /// Number of inverse-power terms of the series.
    pub terms: usize,
    pub max_depth: usize,
}

impl Default for FatouSettings {
    fn default() -> Self {
        FatouSettings { radius: 100.0, terms: 8, max_depth: 2_000_000 }
    }
}

impl FatouSettings {
    pub fn doubled(self) -> Self {
        FatouSettings { radius: 2.0 * self.radius, ..self }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FatouNormalization {
    #[serde(with = "cstr")]
    pub beta: C64,
    /// Imaginary shift added to the raw coordinate.
    pub shift: f64,
    /// Largest number of return-map steps used by the normalization probes.
    pub depth: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EcalleSample {
    #[serde(with = "cstr")]
    pub param: C64,
    pub h: f64,
    /// Height recomputed through the conjugate critical point; should equal -h.
    pub h_conjugate: f64,
    pub depth: usize,
}

/// Asymptotic Fatou coordinate Phi(u) = u - b log u + sum c_j u^-j of the germ at the
/// parabolic point, written in u = -1/(A (z - z1)).
#[derive(Clone, Debug, PartialEq)]
pub struct Expansion {
    pub a: C64,
    pub b: C64,
    pub c: Vec<C64>,
}

impl Expansion {
    /// Coefficients from the Taylor jet of the return map at its parabolic point.
    pub fn from_jet(f: &Jet) -> Self {
        let one = Jet::constant(C64::new(1.0, 0.0));
        let a = f.c[2];
        // in t = 1/u the return map reads u -> u R(t) with R = 1/S
        let mut s = Jet::zero();
        let mut apow = C64::new(1.0, 0.0);
        for j in 1..ORDER {
            let aj = f.c[j] / apow;
            s.c[j - 1] = if j % 2 == 1 { aj } else { -aj };
            apow *= a;
        }
        let r = s.recip();
        let b = r.c[2];
        let mut e = Jet::zero();
        for k in 0..ORDER - 1 {
            e.c[k] = r.c[k + 1];
        }
        e.c[0] -= 1.0;
        e = e - r.log1().scale(b);
        let mut spow = vec![one];
        for j in 1..ORDER - 1 {
            let next = spow[j - 1] * s;
            spow.push(next);
        }
        let mut c = vec![C64::new(0.0, 0.0); ORDER];
        for k in 1..ORDER - 2 {
            c[k] = e.c[k + 1] / k as f64;
            e = e + (spow[k] - one).shift(k).scale(c[k]);
        }
        Expansion { a, b, c }
    }

    pub fn phi(&self, u: C64, terms: usize) -> C64 {
        let mut r = u - self.b * u.ln();
        let inv = u.inv();
        let mut p = inv;
        for j in 1..=terms.min(self.c.len() - 1) {
            r += self.c[j] * p;
            p *= inv;
        }
        r
    }
}

/// Raw coordinate: iterate until the local coordinate enters the far petal, then apply Phi.
pub(crate) fn raw_coordinate(
    step: &dyn Fn(C64) -> C64,
    escaped: &dyn Fn(C64) -> bool,
    z1: C64,
    exp: &Expansion,
    z: C64,
    settings: &FatouSettings,
) -> Result<(C64, usize)> {
    let mut z = z;
    for k in 0..settings.max_depth {
        let u = -(exp.a * (z - z1)).inv();
        if u.norm() > settings.radius && u.arg().abs() < 0.5 {
            return Ok((exp.phi(u, settings.terms) - k as f64, k));
        }
        z = step(z);
        if !(z.re.is_finite() && z.im.is_finite()) || escaped(z) {
            return Err(AtlasError::NotInPetal);
        }
    }
    Err(AtlasError::DepthExhausted)
}

/// Normalized attracting Fatou coordinate of a simple parabolic datum.
#[derive(Clone, Debug)]
pub struct AttractingCoordinate {
    kern: MapKernel,
    period: usize,
    z1: C64,
    targets: Vec<C64>,
    pub expansion: Expansion,
    pub settings: FatouSettings,
    pub norm: FatouNormalization,
    /// Spread of the per-probe offsets; small when the coordinate is consistent.
    pub beta_spread: f64,
}

impl AttractingCoordinate {
    pub fn new(datum: &ParabolicDatum, settings: FatouSettings) -> Result<Self> {
        datum.require_simple()?;
        let kern = datum.kernel();
        let z1 = datum.parabolic_point;
        let expansion = Expansion::from_jet(&kern.iterate_jet(z1, datum.period));
        let targets = Target::all(datum.param.family).iter().filter_map(|t| t.point(&datum.param)).collect();
        let mut coord = AttractingCoordinate {
            kern,
            period: datum.period,
            z1,
            targets,
            expansion,
            settings,
            norm: FatouNormalization { beta: C64::new(0.0, 0.0), shift: 0.0, depth: 0 },
            beta_spread: 0.0,
        };
        // the half-return offset comes from probes in the petal, independent of the critical point
        let mut betas = Vec::new();
        let mut depth = 0;
        for p in coord.petal_probes(4) {
            let (w, k1) = coord.raw(p)?;
            let (ws, k2) = coord.raw(coord.half_return(p))?;
            betas.push(ws - w.conj());
            depth = depth.max(k1).max(k2);
        }
        let beta = betas.iter().sum::<C64>() / betas.len() as f64;
        coord.beta_spread = betas.iter().map(|b| (b - beta).norm()).fold(0.0, f64::max);
        coord.norm = FatouNormalization { beta, shift: -beta.im / 2.0, depth };
        Ok(coord)
    }

    pub fn parabolic_point(&self) -> C64 {
        self.z1
    }

    pub fn return_map(&self, z: C64) -> C64 {
        self.kern.iterate(z, self.period)
    }

    pub fn half_return(&self, z: C64) -> C64 {
        self.kern.half_return(z, self.period / 2)
    }

    /// Points in the attracting petal, off the equator, at twice the escape radius.
    pub fn petal_probes(&self, count: usize) -> Vec<C64> {
        let r = 2.0 * self.settings.radius;
        (0..count)
            .map(|j| {
                let y = -0.3 + 0.6 * (j as f64 + 0.5) / count as f64;
                let u = C64::new(r, r * y);
                self.z1 - (self.expansion.a * u).inv()
            })
            .collect()
    }

    pub fn raw(&self, z: C64) -> Result<(C64, usize)> {
        let step = |w: C64| self.return_map(w);
        let escaped = |w: C64| self.targets.iter().any(|t| (w - t).norm() < 1e-8) || w.norm() > 1e8;
        raw_coordinate(&step, &escaped, self.z1, &self.expansion, z, &self.settings)
    }

    pub fn psi(&self, z: C64) -> Result<C64> {
        Ok(self.raw(z)?.0 + C64::new(0.0, self.norm.shift))
    }
}

/// The normalized coordinate at z together with its normalization.
pub fn attracting_fatou_coordinate(datum: &ParabolicDatum, z: C64) -> Result<(C64, FatouNormalization)> {
    let coord = AttractingCoordinate::new(datum, FatouSettings::default())?;
    Ok((coord.psi(z)?, coord.norm))
}

pub fn critical_ecalle_height(datum: &ParabolicDatum) -> Result<EcalleSample> {
    critical_ecalle_height_with(datum, FatouSettings::default())
}

pub fn critical_ecalle_height_with(datum: &ParabolicDatum, settings: FatouSettings) -> Result<EcalleSample> {
    let coord = AttractingCoordinate::new(datum, settings)?;
    let crit = free_critical_points(&datum.param)?;
    let (w, k) = coord.raw(crit.c_plus)?;
    // n steps of the map carry c_minus to sigma(c_plus)
    let other = datum.kernel().iterate(crit.c_minus, datum.half_period());
    let (ws, _) = coord.raw(other)?;
    Ok(EcalleSample {
        param: datum.param.value,
        h: w.im + coord.norm.shift,
        h_conjugate: ws.im + coord.norm.shift,
        depth: k.max(coord.norm.depth),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_germ_coordinate_is_a_conjugacy() {
        // F(w) = w + w^2 at 0
        let mut jet = Jet::zero();
        jet.c[1] = C64::new(1.0, 0.0);
        jet.c[2] = C64::new(1.0, 0.0);
        let exp = Expansion::from_jet(&jet);
        assert!((exp.b - 1.0).norm() < 1e-14);
        let f = |w: C64| w + w * w;
        let never = |_: C64| false;
        let s = FatouSettings::default();
        let mut w = C64::new(-0.1, 0.02);
        let (p0, _) = raw_coordinate(&f, &never, C64::new(0.0, 0.0), &exp, w, &s).unwrap();
        for k in 1..50 {
            w = f(w);
            let (pk, _) = raw_coordinate(&f, &never, C64::new(0.0, 0.0), &exp, w, &s).unwrap();
            assert!((pk - p0 - k as f64).norm() < 1e-6, "k={k}");
        }
    }

    #[test]
    fn series_residue_matches_cubic_coefficient() {
        let mut jet = Jet::zero();
        jet.c[1] = C64::new(1.0, 0.0);
        jet.c[2] = C64::new(2.0, 1.0);
        jet.c[3] = C64::new(0.5, -0.25);
        let exp = Expansion::from_jet(&jet);
        let expected = C64::new(1.0, 0.0) - jet.c[3] / (jet.c[2] * jet.c[2]);
        assert!((exp.b - expected).norm() < 1e-13);
    }
}
