//! Map formulas for the quartic Newton family N_a and the antipodal cubic family f_q.

use crate::error::{AtlasError, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

pub type C64 = Complex64;

/// Finite points beyond this modulus are moved to the w = 1/z chart.
pub const CHART_SWITCH: f64 = 1e8;
pub const ALGEBRAIC_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "newton")]
    NewtonQuartic,
    #[serde(rename = "antipodal")]
    AntipodalCubic,
}

impl Family {
    pub fn slug(self) -> &'static str {
        match self {
            Family::NewtonQuartic => "newton",
            Family::AntipodalCubic => "antipodal",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.slug())
    }
}

impl FromStr for Family {
    type Err = AtlasError;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "newton" | "newtonquartic" => Ok(Family::NewtonQuartic),
            "antipodal" | "antipodalcubic" => Ok(Family::AntipodalCubic),
            other => Err(AtlasError::InvalidArgument(format!("unknown family '{other}'"))),
        }
    }
}

/// Parses the wire form "re,im".
pub fn parse_complex(s: &str) -> Result<C64> {
    let bad = || AtlasError::InvalidArgument(format!("expected RE,IM but got '{s}'"));
    let (re, im) = s.split_once(',').ok_or_else(bad)?;
    let re: f64 = re.trim().parse().map_err(|_| bad())?;
    let im: f64 = im.trim().parse().map_err(|_| bad())?;
    if !re.is_finite() || !im.is_finite() {
        return Err(bad());
    }
    Ok(C64::new(re, im))
}

pub fn format_complex(z: C64) -> String {
    format!("{},{}", z.re, z.im)
}

/// Serde adapter writing complex numbers as "re,im" strings.
pub mod cstr {
    use super::{format_complex, parse_complex, C64};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(z: &C64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_complex(*z))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
        let s = String::deserialize(d)?;
        parse_complex(&s).map_err(serde::de::Error::custom)
    }
}

pub mod cstr_vec {
    use super::{format_complex, parse_complex, C64};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[C64], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|z| format_complex(*z)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<C64>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter()
            .map(|s| parse_complex(s).map_err(serde::de::Error::custom))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    InU,
    InConjugateU,
    Outside,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionMembership {
    pub region: Region,
    pub on_symmetry_locus: bool,
}

/// Membership in U: 2 Im(a)^2 - Re(a)^2 - 2 > 0 and Im(a) > 0. Equality counts as Outside.
pub fn region_membership(a: C64) -> RegionMembership {
    let q = 2.0 * a.im * a.im - a.re * a.re - 2.0;
    let region = if q > 0.0 && a.im > 0.0 {
        Region::InU
    } else if q > 0.0 && a.im < 0.0 {
        Region::InConjugateU
    } else {
        Region::Outside
    };
    RegionMembership {
        region,
        on_symmetry_locus: region == Region::InU && a.re == 0.0,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Parameter {
    pub family: Family,
    #[serde(with = "cstr")]
    pub value: C64,
    /// Membership in U; always true for the antipodal family.
    pub in_u: bool,
}

impl Parameter {
    pub fn new(family: Family, value: C64) -> Self {
        let in_u = match family {
            Family::NewtonQuartic => region_membership(value).region == Region::InU,
            Family::AntipodalCubic => true,
        };
        Parameter { family, value, in_u }
    }

    pub fn newton(a: C64) -> Self {
        Self::new(Family::NewtonQuartic, a)
    }

    pub fn antipodal(q: C64) -> Self {
        Self::new(Family::AntipodalCubic, q)
    }

    pub fn check_finite(&self) -> Result<()> {
        if self.value.re.is_finite() && self.value.im.is_finite() {
            Ok(())
        } else {
            Err(AtlasError::NonFiniteParameter)
        }
    }

    /// Errors unless the parameter is a valid member of its family's domain.
    pub fn require_domain(&self) -> Result<()> {
        self.check_finite()?;
        if !self.in_u {
            return Err(AtlasError::OutsideDomain(format_complex(self.value)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Chart {
    Finite,
    Infinity,
}

/// A point of the Riemann sphere. In the Infinity chart `z` holds w = 1/z.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpherePoint {
    pub chart: Chart,
    pub z: C64,
}

impl SpherePoint {
    pub const INFINITY: SpherePoint = SpherePoint { chart: Chart::Infinity, z: C64 { re: 0.0, im: 0.0 } };

    pub fn finite(z: C64) -> Self {
        SpherePoint { chart: Chart::Finite, z }.normalized()
    }

    /// Applies the chart switch rule.
    pub fn normalized(self) -> Self {
        match self.chart {
            Chart::Finite if !(self.z.re.is_finite() && self.z.im.is_finite()) => Self::INFINITY,
            Chart::Finite if self.z.norm() > CHART_SWITCH => SpherePoint { chart: Chart::Infinity, z: self.z.inv() },
            _ => self,
        }
    }

    pub fn is_infinity(&self) -> bool {
        self.chart == Chart::Infinity && self.z == C64::new(0.0, 0.0)
    }

    /// Finite representative; infinite components when the point is infinity.
    pub fn to_c64(&self) -> C64 {
        match self.chart {
            Chart::Finite => self.z,
            Chart::Infinity if self.z == C64::new(0.0, 0.0) => C64::new(f64::INFINITY, f64::INFINITY),
            Chart::Infinity => self.z.inv(),
        }
    }
}

#[inline]
fn horner_d(c: &[C64; 5], deg: usize, z: C64) -> (C64, C64) {
    let mut p = c[deg];
    let mut dp = C64::new(0.0, 0.0);
    for k in (0..deg).rev() {
        dp = dp * z + p;
        p = p * z + c[k];
    }
    (p, dp)
}

#[inline]
fn horner(c: &[C64; 5], deg: usize, z: C64) -> C64 {
    let mut p = c[deg];
    for k in (0..deg).rev() {
        p = p * z + c[k];
    }
    p
}

/// The family map as a quotient P/Q with coefficients in ascending order.
#[derive(Clone, Copy, Debug)]
pub struct MapKernel {
    pub param: Parameter,
    num: [C64; 5],
    den: [C64; 5],
    num_rev: [C64; 5],
    den_rev: [C64; 5],
    degree: usize,
}

impl MapKernel {
    pub fn new(param: Parameter) -> Self {
        let v = param.value;
        let zero = C64::new(0.0, 0.0);
        let (num, den, degree) = match param.family {
            Family::NewtonQuartic => {
                // cancellation-free form z f' - f over f'
                let x = v.re;
                let m = v.norm_sqr();
                let num = [m, 0.0, m - 1.0, -4.0 * x, 3.0].map(|c| C64::new(c, 0.0));
                let den = [2.0 * x, 2.0 * (m - 1.0), -6.0 * x, 4.0, 0.0].map(|c| C64::new(c, 0.0));
                (num, den, 4)
            }
            Family::AntipodalCubic => {
                let num = [zero, zero, v, C64::new(-1.0, 0.0), zero];
                let den = [C64::new(1.0, 0.0), v.conj(), zero, zero, zero];
                (num, den, 3)
            }
        };
        let mut num_rev = [zero; 5];
        let mut den_rev = [zero; 5];
        for k in 0..=degree {
            num_rev[k] = num[degree - k];
            den_rev[k] = den[degree - k];
        }
        MapKernel { param, num, den, num_rev, den_rev, degree }
    }

    pub fn family(&self) -> Family {
        self.param.family
    }

    /// Numerator and denominator coefficients (ascending), used by jet propagation.
    pub fn coefficients(&self) -> (&[C64], &[C64]) {
        (&self.num[..=self.degree], &self.den[..=self.degree])
    }

    #[inline]
    pub fn map(&self, z: C64) -> C64 {
        horner(&self.num, self.degree, z) / horner(&self.den, self.degree, z)
    }

    /// Map value and derivative in the finite chart.
    #[inline]
    pub fn map_d(&self, z: C64) -> (C64, C64) {
        let (p, dp) = horner_d(&self.num, self.degree, z);
        let (q, dq) = horner_d(&self.den, self.degree, z);
        let w = p / q;
        (w, (dp - w * dq) / q)
    }

    pub fn iterate(&self, mut z: C64, k: usize) -> C64 {
        for _ in 0..k {
            z = self.map(z);
        }
        z
    }

    /// k-fold iterate with its derivative.
    pub fn iterate_d(&self, mut z: C64, k: usize) -> (C64, C64) {
        let mut d = C64::new(1.0, 0.0);
        for _ in 0..k {
            let (w, dw) = self.map_d(z);
            d *= dw;
            z = w;
        }
        (z, d)
    }

    /// Sphere-aware evaluation; the derivative is expressed in the input and output charts.
    pub fn evaluate(&self, z: SpherePoint) -> (SpherePoint, C64) {
        let z = z.normalized();
        let (p, dp, q, dq) = match z.chart {
            Chart::Finite => {
                let (p, dp) = horner_d(&self.num, self.degree, z.z);
                let (q, dq) = horner_d(&self.den, self.degree, z.z);
                (p, dp, q, dq)
            }
            Chart::Infinity => {
                let (p, dp) = horner_d(&self.num_rev, self.degree, z.z);
                let (q, dq) = horner_d(&self.den_rev, self.degree, z.z);
                (p, dp, q, dq)
            }
        };
        if q.norm() * CHART_SWITCH >= p.norm() && q != C64::new(0.0, 0.0) {
            let w = p / q;
            (SpherePoint { chart: Chart::Finite, z: w }, (dp - w * dq) / q)
        } else {
            let w = q / p;
            (SpherePoint { chart: Chart::Infinity, z: w }, (dq - w * dp) / p)
        }
    }

    pub fn involution(&self, z: C64) -> C64 {
        involution_c(self.param.family, z)
    }

    /// The holomorphic part G of the half-return sigma = conj(G), with G'.
    /// Newton: G = N^n. Antipodal: G = -1 / f^n, so that sigma = eta o f^n.
    pub fn half_return_g(&self, z: C64, n: usize) -> (C64, C64) {
        let (w, d) = self.iterate_d(z, n);
        match self.param.family {
            Family::NewtonQuartic => (w, d),
            Family::AntipodalCubic => (-w.inv(), d / (w * w)),
        }
    }

    pub fn half_return(&self, z: C64, n: usize) -> C64 {
        let w = self.iterate(z, n);
        self.involution(w)
    }
}

/// Family involution on finite representatives: conjugation or the antipodal map.
pub fn involution_c(family: Family, z: C64) -> C64 {
    match family {
        Family::NewtonQuartic => z.conj(),
        Family::AntipodalCubic => -z.conj().inv(),
    }
}

pub fn involution(param: &Parameter, z: SpherePoint) -> SpherePoint {
    let z = z.normalized();
    match param.family {
        Family::NewtonQuartic => SpherePoint { chart: z.chart, z: z.z.conj() },
        Family::AntipodalCubic => match z.chart {
            // eta(z) = -1/conj(z): 1/eta(z) = -conj(z)
            Chart::Finite => {
                if z.z == C64::new(0.0, 0.0) {
                    SpherePoint::INFINITY
                } else {
                    SpherePoint { chart: Chart::Infinity, z: -z.z.conj() }.normalized_inverse()
                }
            }
            Chart::Infinity => SpherePoint { chart: Chart::Finite, z: -z.z.conj() }.normalized(),
        },
    }
}

impl SpherePoint {
    // an Infinity-chart point with |w| large is really a finite point
    fn normalized_inverse(self) -> Self {
        if self.chart == Chart::Infinity && self.z.norm() > 1.0 / CHART_SWITCH {
            SpherePoint { chart: Chart::Finite, z: self.z.inv() }
        } else {
            self
        }
    }
}

pub fn evaluate(param: &Parameter, z: SpherePoint) -> Result<(SpherePoint, C64)> {
    param.check_finite()?;
    Ok(MapKernel::new(*param).evaluate(z))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalPair {
    #[serde(with = "cstr")]
    pub c_plus: C64,
    #[serde(with = "cstr")]
    pub c_minus: C64,
}

pub fn free_critical_points(param: &Parameter) -> Result<CriticalPair> {
    param.check_finite()?;
    let v = param.value;
    match param.family {
        Family::NewtonQuartic => {
            param.require_domain()?;
            let disc = 9.0 * (v * v + v.conj() * v.conj()) - 6.0 * v.norm_sqr() + 24.0;
            let s = disc.sqrt();
            let c1 = (3.0 * (v + v.conj()) + s) / 12.0;
            let c2 = (3.0 * (v + v.conj()) - s) / 12.0;
            let (c_plus, c_minus) = if c1.im > 0.0 { (c1, c2) } else { (c2, c1) };
            Ok(CriticalPair { c_plus, c_minus })
        }
        Family::AntipodalCubic => {
            if v == C64::new(0.0, 0.0) {
                return Err(AtlasError::DegenerateParameter("q = 0".into()));
            }
            let m = v.norm_sqr();
            let s = ((m - 3.0) * (m - 3.0) + 16.0 * m).sqrt();
            let denom = 4.0 * v.conj();
            Ok(CriticalPair { c_plus: C64::new((m - 3.0) + s, 0.0) / denom, c_minus: C64::new((m - 3.0) - s, 0.0) / denom })
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoleSet {
    pub p_real: f64,
    #[serde(with = "cstr")]
    pub p_pair: C64,
}

/// f_a'(z) = 4z^3 - 6 Re(a) z^2 + 2(|a|^2 - 1) z + 2 Re(a).
pub fn newton_fprime(a: C64, z: C64) -> (C64, C64) {
    let x = a.re;
    let m = a.norm_sqr();
    let v = ((4.0 * z - 6.0 * x) * z + 2.0 * (m - 1.0)) * z + 2.0 * x;
    let d = (12.0 * z - 12.0 * x) * z + 2.0 * (m - 1.0);
    (v, d)
}

pub fn newton_poles(a: C64) -> Result<PoleSet> {
    let p = Parameter::newton(a);
    p.require_domain()?;
    let fp = |x: f64| newton_fprime(a, C64::new(x, 0.0)).0.re;
    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if fp(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-16 {
            break;
        }
    }
    let mut r = 0.5 * (lo + hi);
    for _ in 0..3 {
        let (v, d) = newton_fprime(a, C64::new(r, 0.0));
        if d.re != 0.0 {
            let nr = r - v.re / d.re;
            if nr > -1.0 && nr < 1.0 {
                r = nr;
            }
        }
    }
    // deflate 4z^3 + bz^2 + cz + d by (z - r)
    let (b, c) = (-6.0 * a.re, 2.0 * (a.norm_sqr() - 1.0));
    let b1 = b + 4.0 * r;
    let c1 = c + r * b1;
    let disc = C64::new(b1 * b1 - 16.0 * c1, 0.0).sqrt();
    let mut z = (C64::new(-b1, 0.0) + disc) / 8.0;
    if z.im < 0.0 {
        z = z.conj();
    }
    for _ in 0..4 {
        let (v, d) = newton_fprime(a, z);
        if d.norm() > 0.0 {
            z -= v / d;
        }
    }
    Ok(PoleSet { p_real: r, p_pair: z })
}
