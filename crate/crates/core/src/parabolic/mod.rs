//! Parabolic parameters on tricorn-component boundaries, antiholomorphic Fatou coordinates,
//! arc continuation by critical Ecalle height, and perturbed coordinates off the arc.

mod arc;
mod fatou;
mod implosion;

pub use arc::{arc_normal, trace_arc, ArcSample, ArcTrace, TraceSettings};
pub use fatou::{
    attracting_fatou_coordinate, critical_ecalle_height, critical_ecalle_height_with, AttractingCoordinate, EcalleSample,
    Expansion, FatouNormalization, FatouSettings,
};
pub use implosion::{repelling_fatou_and_phase, GateCoordinate, PhaseSample};

use crate::error::{AtlasError, Result};
use crate::family::{cstr, cstr_vec, free_critical_points, Family, MapKernel, Parameter, C64};
use crate::linalg::{null_vector_3x4, solve_real};
use crate::orbit::{classify_tier, ComponentType, Tier};
use serde::{Deserialize, Serialize};

/// |A| below this counts as a degenerate (cusp) parabolic.
pub const CUSP_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PetalKind {
    Simple,
    Cusp,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalCoeffs {
    /// Quadratic coefficient of the return map at the parabolic point.
    #[serde(rename = "A", with = "cstr")]
    pub a: C64,
    /// Residue of the log term, 1 - B/A^2.
    #[serde(with = "cstr")]
    pub b: C64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParabolicDatum {
    pub param: Parameter,
    pub period: usize,
    #[serde(with = "cstr")]
    pub parabolic_point: C64,
    #[serde(with = "cstr_vec")]
    pub cycle: Vec<C64>,
    pub petal_kind: PetalKind,
    pub local_coeffs: LocalCoeffs,
    /// Multiplier of the full return map at the parabolic point.
    #[serde(with = "cstr")]
    pub multiplier: C64,
}

impl ParabolicDatum {
    pub fn half_period(&self) -> usize {
        self.period / 2
    }

    pub fn kernel(&self) -> MapKernel {
        MapKernel::new(self.param)
    }

    /// Builds the datum for a parabolic point z1 of the map at `param`, no refinement.
    pub fn at(param: Parameter, period: usize, z1: C64) -> Self {
        let kern = MapKernel::new(param);
        let jet = kern.iterate_jet(z1, period);
        let a = jet.c[2];
        let b = C64::new(1.0, 0.0) - jet.c[3] / (a * a);
        let mut cycle = Vec::with_capacity(period);
        let mut z = z1;
        for _ in 0..period {
            cycle.push(z);
            z = kern.map(z);
        }
        let petal_kind = if a.norm() < CUSP_TOL { PetalKind::Cusp } else { PetalKind::Simple };
        ParabolicDatum { param, period, parabolic_point: z1, cycle, petal_kind, local_coeffs: LocalCoeffs { a, b }, multiplier: jet.c[1] }
    }

    pub fn multiplier_residual(&self) -> f64 {
        (self.multiplier - 1.0).norm()
    }

    pub fn require_simple(&self) -> Result<()> {
        match self.petal_kind {
            PetalKind::Simple => Ok(()),
            PetalKind::Cusp => Err(AtlasError::PreconditionFailed("datum is a cusp, not a simple parabolic".into())),
        }
    }

    pub(crate) fn state(&self) -> [f64; 4] {
        let z = self.parabolic_point;
        let a = self.param.value;
        [z.re, z.im, a.re, a.im]
    }
}

/// The real system sigma(z) = z, |G'(z)|^2 = 1 in the unknowns (z, parameter).
#[derive(Clone, Copy, Debug)]
pub(crate) struct ArcSystem {
    pub family: Family,
    pub n: usize,
}

impl ArcSystem {
    pub fn new(family: Family, period: usize) -> Self {
        ArcSystem { family, n: period / 2 }
    }

    pub fn residual(&self, x: [f64; 4]) -> [f64; 3] {
        let kern = MapKernel::new(Parameter::new(self.family, C64::new(x[2], x[3])));
        let z = C64::new(x[0], x[1]);
        let (g, dg) = kern.half_return_g(z, self.n);
        let w = g.conj() - z;
        [w.re, w.im, dg.norm_sqr() - 1.0]
    }

    pub fn jacobian(&self, x: [f64; 4]) -> [[f64; 4]; 3] {
        let mut j = [[0.0; 4]; 3];
        for k in 0..4 {
            let h = 1e-7 * (1.0 + x[k].abs());
            let mut xp = x;
            let mut xm = x;
            xp[k] += h;
            xm[k] -= h;
            let (rp, rm) = (self.residual(xp), self.residual(xm));
            for i in 0..3 {
                j[i][k] = (rp[i] - rm[i]) / (2.0 * h);
            }
        }
        j
    }

    pub fn tangent(&self, x: [f64; 4], prefer: Option<[f64; 4]>) -> Option<[f64; 4]> {
        null_vector_3x4(&self.jacobian(x), prefer)
    }

    /// Newton on the system bordered by the hyperplane t.(x - x0) = 0.
    pub fn correct(&self, x0: [f64; 4], t: [f64; 4]) -> Option<[f64; 4]> {
        let mut x = x0;
        for _ in 0..40 {
            let r = self.residual(x);
            let j = self.jacobian(x);
            let off: f64 = (0..4).map(|k| t[k] * (x[k] - x0[k])).sum();
            let a = [j[0], j[1], j[2], t];
            let dx = solve_real(a, [-r[0], -r[1], -r[2], -off])?;
            for k in 0..4 {
                x[k] += dx[k];
            }
            if !x.iter().all(|v| v.is_finite()) {
                return None;
            }
            let dn = dx.iter().map(|v| v * v).sum::<f64>().sqrt();
            if dn < 1e-14 * (1.0 + x.iter().map(|v| v.abs()).fold(0.0, f64::max)) {
                break;
            }
        }
        let r = self.residual(x);
        if r.iter().map(|v| v * v).sum::<f64>().sqrt() < 1e-11 {
            Some(x)
        } else {
            None
        }
    }

    pub fn datum(&self, x: [f64; 4]) -> ParabolicDatum {
        ParabolicDatum::at(Parameter::new(self.family, C64::new(x[2], x[3])), 2 * self.n, C64::new(x[0], x[1]))
    }
}

fn is_tricorn(param: &Parameter, period: usize, tier: Tier) -> bool {
    param.require_domain().is_ok()
        && matches!(classify_tier(param, tier), Ok(c) if c.component_type == ComponentType::Tricorn(period))
}

/// Locates the parabolic parameter where the ray center + s*direction leaves the tricorn
/// component of the given period, and refines it to an exact simple parabolic.
pub fn find_boundary_parabolic(center: Parameter, direction: C64, period: usize) -> Result<ParabolicDatum> {
    if period == 0 || period % 2 == 1 {
        return Err(AtlasError::InvalidArgument(format!("tricorn period must be even, got {period}")));
    }
    if !direction.norm().is_finite() || direction.norm() == 0.0 {
        return Err(AtlasError::InvalidArgument("direction must be a nonzero finite complex".into()));
    }
    let d = direction / direction.norm();
    let verdict = classify_tier(&center, Tier::Analysis)?;
    if verdict.component_type != ComponentType::Tricorn(period) {
        return Err(AtlasError::PreconditionFailed(format!(
            "center classifies as {}, expected Tricorn({period})",
            verdict.component_type
        )));
    }
    let at = |s: f64| Parameter::new(center.family, center.value + s * d);
    // march outward geometrically until the verdict changes
    let mut s_in = 0.0;
    let mut s_out = None;
    let mut s = 1e-3;
    for _ in 0..48 {
        if is_tricorn(&at(s), period, Tier::Standard) {
            s_in = s;
            s *= 1.3;
        } else {
            s_out = Some(s);
            break;
        }
    }
    let mut s_out = s_out.ok_or_else(|| AtlasError::BisectionFailed("verdict unchanged along the ray".into()))?;
    while s_out - s_in > 1e-4 * s_out {
        let mid = 0.5 * (s_in + s_out);
        if is_tricorn(&at(mid), period, Tier::Standard) {
            s_in = mid;
        } else {
            s_out = mid;
        }
    }
    if s_in == 0.0 {
        return Err(AtlasError::BisectionFailed("no interior sample on the ray".into()));
    }
    // seed from the attracting cycle point that captures c_plus
    let inner = at(s_in);
    let kern = MapKernel::new(inner);
    let cls = classify_tier(&inner, Tier::Analysis)?;
    let cycle = cls
        .cycle()
        .ok_or_else(|| AtlasError::RefinementDiverged("interior sample has no attracting cycle".into()))?;
    let c = free_critical_points(&inner)?.c_plus;
    let tail = kern.iterate(c, period * 4000);
    let z0 = *cycle
        .points
        .iter()
        .min_by(|a, b| (**a - tail).norm().total_cmp(&(**b - tail).norm()))
        .unwrap();
    let sys = ArcSystem::new(center.family, period);
    let x = solve_on_ray(&sys, center.value, d, [z0.re, z0.im, s_in])?;
    if !(x[2] > 0.0 && x[2] < 2.0 * s_out + 1e-3) {
        return Err(AtlasError::RefinementDiverged(format!("ray offset {} left the bracket", x[2])));
    }
    let a = center.value + x[2] * d;
    let datum = ParabolicDatum::at(Parameter::new(center.family, a), period, C64::new(x[0], x[1]));
    if datum.multiplier_residual() > 1e-6 {
        return Err(AtlasError::RefinementDiverged(format!("multiplier residual {:e}", datum.multiplier_residual())));
    }
    Ok(datum)
}

/// Newton on (Re z, Im z, s) with the parameter constrained to the ray.
fn solve_on_ray(sys: &ArcSystem, a0: C64, d: C64, mut x: [f64; 3]) -> Result<[f64; 3]> {
    let res = |x: [f64; 3]| {
        let a = a0 + x[2] * d;
        sys.residual([x[0], x[1], a.re, a.im])
    };
    for _ in 0..80 {
        let r = res(x);
        let mut j = [[0.0; 3]; 3];
        for k in 0..3 {
            let h = 1e-7 * (1.0 + x[k].abs());
            let mut xp = x;
            let mut xm = x;
            xp[k] += h;
            xm[k] -= h;
            let (rp, rm) = (res(xp), res(xm));
            for i in 0..3 {
                j[i][k] = (rp[i] - rm[i]) / (2.0 * h);
            }
        }
        let dx = solve_real(j, [-r[0], -r[1], -r[2]]).ok_or(AtlasError::DerivativeSingular)?;
        // damp large steps so the iteration cannot jump to a different boundary point
        let dn = dx.iter().map(|v| v * v).sum::<f64>().sqrt();
        let lam = if dn > 0.05 { 0.05 / dn } else { 1.0 };
        for k in 0..3 {
            x[k] += lam * dx[k];
        }
        if !x.iter().all(|v| v.is_finite()) {
            return Err(AtlasError::RefinementDiverged("non-finite iterate".into()));
        }
        if lam == 1.0 && dn < 1e-15 * (1.0 + x[0].abs() + x[1].abs()) {
            break;
        }
    }
    let r = res(x);
    let rn = r.iter().map(|v| v * v).sum::<f64>().sqrt();
    if rn > 1e-11 {
        return Err(AtlasError::RefinementDiverged(format!("residual {rn:e}")));
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cusp_tag_follows_quadratic_coefficient() {
        // at a = 2i the fixed point 1 is superattracting; the datum constructor still fills coefficients
        let d = ParabolicDatum::at(Parameter::newton(C64::new(0.0, 2.0)), 2, C64::new(1.0, 0.0));
        assert_eq!(d.cycle.len(), 2);
        assert!(d.multiplier.norm() < 1e-12);
    }
}
