use super::ParabolicDatum;
use crate::error::{AtlasError, Result};
use crate::family::{cstr, free_critical_points, MapKernel, Parameter, C64};
use crate::linalg::lstsq_complex;
use crate::orbit::{classify_tier, refine_periodic_kernel, ComponentType, Target, Tier};
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseSample {
    #[serde(with = "cstr")]
    pub param: C64,
    pub escape_time: usize,
    pub lifted_phase: f64,
    pub transit_height: f64,
    /// Ecalle height of the critical point in the incoming coordinate.
    pub incoming_height: f64,
}

const FIT_TERMS: usize = 16;
const FIT_SAMPLES: usize = 400;
const CORE: f64 = 0.6;
const MAX_STEPS: usize = 20_000_000;

/// Fatou coordinate of the perturbed return map on the gate between its two split fixed
/// points. It solves Psi(F z) = Psi(z) + 1 on a disk around the gate: two logarithmic
/// terms carry the fixed-point singularities and a fitted polynomial absorbs the rest.
#[derive(Clone, Debug)]
pub struct GateCoordinate {
    kern: MapKernel,
    period: usize,
    pub zeta: [C64; 2],
    pub logs: [C64; 2],
    pub center: C64,
    pub radius: f64,
    mu: Vec<C64>,
    /// Largest Abel-equation residual over the fitting samples.
    pub fit_residual: f64,
}

impl GateCoordinate {
    /// Splits the former parabolic point z1 of `kern` and fits the coordinate on a disk of
    /// the given radius. `incoming` is a point on the attracting side used to label the pair.
    pub fn build(kern: MapKernel, period: usize, z1: C64, radius: f64, incoming: C64) -> Result<Self> {
        let jet = kern.iterate_jet(z1, period);
        let e0 = jet.c[0] - z1;
        let a = jet.c[2];
        if a.norm() == 0.0 {
            return Err(AtlasError::SplitPointsNotFound("degenerate quadratic term".into()));
        }
        let delta = (-e0 / a).sqrt();
        let (z_a, r_a) = refine_periodic_kernel(&kern, z1 + delta, period)
            .map_err(|e| AtlasError::SplitPointsNotFound(e.to_string()))?;
        let (z_b, r_b) = refine_periodic_kernel(&kern, z1 - delta, period)
            .map_err(|e| AtlasError::SplitPointsNotFound(e.to_string()))?;
        if (z_a - z_b).norm() < 1e-12 {
            return Err(AtlasError::SplitPointsNotFound("both seeds refined to the same point".into()));
        }
        let center = 0.5 * (z_a + z_b);
        // widen the disk for larger splittings so both points stay well inside the core
        let radius = radius.max(1.2 * (z_a - z_b).norm());
        if (center - z1).norm() > radius {
            return Err(AtlasError::SplitPointsNotFound("split points outside the perturbation neighborhood".into()));
        }
        let sigma = |z: C64| kern.half_return(z, period / 2);
        if (sigma(z_a) - z_b).norm() > 1e-7 * (1.0 + z_b.norm()) {
            return Err(AtlasError::SplitPointsNotFound("split points are not exchanged by the half-return".into()));
        }
        // label so that the incoming side sits at small positive arg X
        let ((z1s, l1), (z2s, l2)) = {
            let x = (incoming - z_a) / (incoming - z_b);
            if x.arg() >= 0.0 {
                ((z_a, r_a.ln()), (z_b, r_b.ln()))
            } else {
                ((z_b, r_b.ln()), (z_a, r_a.ln()))
            }
        };
        let mut g = GateCoordinate {
            kern,
            period,
            zeta: [z1s, z2s],
            logs: [l1, l2],
            center,
            radius,
            mu: vec![C64::new(0.0, 0.0); FIT_TERMS],
            fit_residual: 0.0,
        };
        g.fit()?;
        Ok(g)
    }

    fn fit(&mut self) -> Result<()> {
        let mut rows = Vec::with_capacity(2 * FIT_SAMPLES);
        let mut rhs = Vec::with_capacity(2 * FIT_SAMPLES);
        for &scale in &[1.0, CORE] {
            for j in 0..FIT_SAMPLES {
                let z = self.center + C64::from_polar(scale * self.radius, TAU * j as f64 / FIT_SAMPLES as f64);
                let fz = self.step(z);
                let e = self.log_increment(z, fz) - 1.0;
                let (t0, t1) = ((z - self.center) / self.radius, (fz - self.center) / self.radius);
                let mut row = Vec::with_capacity(FIT_TERMS);
                let (mut p0, mut p1) = (t0, t1);
                for _ in 0..FIT_TERMS {
                    row.push(p1 - p0);
                    p0 *= t0;
                    p1 *= t1;
                }
                rows.push(row);
                rhs.push(-e);
            }
        }
        self.mu = lstsq_complex(&rows, &rhs).ok_or_else(|| AtlasError::SplitPointsNotFound("gate fit singular".into()))?;
        self.fit_residual = rows
            .iter()
            .zip(rhs.iter())
            .map(|(row, y)| (row.iter().zip(self.mu.iter()).map(|(b, m)| b * m).sum::<C64>() - y).norm())
            .fold(0.0, f64::max);
        Ok(())
    }

    fn step(&self, z: C64) -> C64 {
        self.kern.iterate(z, self.period)
    }

    /// Log part of Psi(w) - Psi(z), computed from ratios so that no branch is crossed.
    fn log_increment(&self, z: C64, w: C64) -> C64 {
        ((w - self.zeta[0]) / (z - self.zeta[0])).ln() / self.logs[0]
            + ((w - self.zeta[1]) / (z - self.zeta[1])).ln() / self.logs[1]
    }

    /// arg of (z - zeta1)/(z - zeta2) taken in (0, 2 pi): incoming side near 0, outgoing near 2 pi.
    pub fn gate_angle(&self, z: C64) -> f64 {
        let a = ((z - self.zeta[0]) / (z - self.zeta[1])).arg();
        if a < 0.0 {
            a + TAU
        } else {
            a
        }
    }

    pub fn in_core(&self, z: C64) -> bool {
        (z - self.center).norm() < CORE * self.radius
    }

    pub fn eval(&self, z: C64) -> C64 {
        let x = (z - self.zeta[0]) / (z - self.zeta[1]);
        let logx = C64::new(x.norm().ln(), self.gate_angle(z));
        let kappa = self.logs[0].inv() + self.logs[1].inv();
        let t = (z - self.center) / self.radius;
        let mut poly = C64::new(0.0, 0.0);
        let mut p = t;
        for m in &self.mu {
            poly += m * p;
            p *= t;
        }
        logx / self.logs[0] + kappa * ((z - self.zeta[1]) / (self.center - self.zeta[1])).ln() + poly
    }

    /// Psi(F z) - Psi(z) - 1, branch-free.
    pub fn abel_residual(&self, z: C64) -> C64 {
        let w = self.step(z);
        let (t0, t1) = ((z - self.center) / self.radius, (w - self.center) / self.radius);
        let mut d = self.log_increment(z, w) - 1.0;
        let (mut p0, mut p1) = (t0, t1);
        for m in &self.mu {
            d += m * (p1 - p0);
            p0 *= t0;
            p1 *= t1;
        }
        d
    }

    /// Inverse branch of the return map near the gate, by Newton from z - (F z - z).
    fn inverse(&self, z: C64) -> Result<C64> {
        let mut w = 2.0 * z - self.step(z);
        for _ in 0..60 {
            let (fw, d) = self.kern.iterate_d(w, self.period);
            let dw = (fw - z) / d;
            w -= dw;
            if dw.norm() < 1e-15 * (1.0 + w.norm()) {
                return Ok(w);
            }
        }
        if (self.step(w) - z).norm() < 1e-12 * (1.0 + z.norm()) {
            Ok(w)
        } else {
            Err(AtlasError::RefinementDiverged("inverse return map".into()))
        }
    }

    /// Raw incoming coordinate: forward to the first core point on the incoming side.
    pub fn incoming_raw(&self, z: C64, escaped: &dyn Fn(C64) -> bool) -> Result<C64> {
        let mut z = z;
        for j in 0..MAX_STEPS {
            if self.in_core(z) && self.gate_angle(z) < PI {
                return Ok(self.eval(z) - j as f64);
            }
            z = self.step(z);
            if !(z.re.is_finite() && z.im.is_finite()) || escaped(z) {
                return Err(AtlasError::NotInPetal);
            }
        }
        Err(AtlasError::DepthExhausted)
    }

    /// Raw outgoing coordinate: backward to the first core point on the outgoing side.
    pub fn outgoing_raw(&self, z: C64) -> Result<C64> {
        let mut z = z;
        for j in 0..100_000 {
            if self.in_core(z) && self.gate_angle(z) >= PI {
                return Ok(self.eval(z) + j as f64);
            }
            z = self.inverse(z)?;
        }
        Err(AtlasError::DepthExhausted)
    }
}

/// Escape time, lifted phase and transit height of the critical orbit for a parameter just
/// outside the tricorn component whose boundary carries `reference`.
pub fn repelling_fatou_and_phase(param: C64, reference: &ParabolicDatum) -> Result<PhaseSample> {
    reference.require_simple()?;
    let p = Parameter::new(reference.param.family, param);
    p.require_domain()?;
    let cls = classify_tier(&p, Tier::Analysis)?;
    if cls.component_type == ComponentType::Tricorn(reference.period) {
        return Err(AtlasError::NotEscaping);
    }
    let kern = MapKernel::new(p);
    let z1 = reference.parabolic_point;
    let a = reference.local_coeffs.a;
    let radius = 0.35 / a.norm();
    // reference points on either side of the gate, fixed by the reference datum only
    let dir = a.conj() / a.norm();
    let xi_in = z1 - 1.5 * radius * dir;
    let xi_out = z1 + 1.5 * radius * dir;
    let gate = GateCoordinate::build(kern, reference.period, z1, radius, xi_in)?;

    let targets: Vec<C64> = Target::all(p.family).iter().filter_map(|t| t.point(&p)).collect();
    let escaped = |w: C64| targets.iter().any(|t| (w - t).norm() < 1e-8) || w.norm() > 1e8;
    let sigma = |z: C64| kern.half_return(z, reference.period / 2);

    // probes off the equator on each side fix the imaginary normalization
    let probe = |sign: f64, y: f64| z1 + sign * 1.5 * radius * dir / C64::new(1.0, y);
    let mut beta_in = C64::new(0.0, 0.0);
    let mut beta_out = C64::new(0.0, 0.0);
    let ys = [-0.4, -0.2, 0.2, 0.4];
    for &y in &ys {
        let q = probe(-1.0, y);
        beta_in += gate.incoming_raw(sigma(q), &escaped)? - gate.incoming_raw(q, &escaped)?.conj();
        let q = probe(1.0, y);
        beta_out += gate.outgoing_raw(sigma(q))? - gate.outgoing_raw(q)?.conj();
    }
    beta_in /= ys.len() as f64;
    beta_out /= ys.len() as f64;
    let c_in = C64::new(-gate.incoming_raw(xi_in, &escaped)?.re, -beta_in.im / 2.0);
    let c_out = C64::new(-gate.outgoing_raw(xi_out)?.re, -beta_out.im / 2.0);

    // follow the critical orbit through the gate
    let c = free_critical_points(&p)?.c_plus;
    let mut z = c;
    let mut entry: Option<C64> = None;
    let mut last_core: Option<(usize, C64)> = None;
    for k in 0..MAX_STEPS {
        let core = gate.in_core(z);
        if core {
            if entry.is_none() && gate.gate_angle(z) < PI {
                entry = Some(gate.eval(z) - k as f64);
            }
            if entry.is_some() {
                last_core = Some((k, z));
            }
        } else if let Some((kl, zl)) = last_core {
            if gate.gate_angle(zl) >= PI {
                let out = gate.eval(zl) - kl as f64 + c_out;
                let incoming = entry.unwrap() + c_in;
                let lifted = out.re;
                let escape_time = (-lifted).ceil().max(1.0) as usize;
                return Ok(PhaseSample {
                    param,
                    escape_time,
                    lifted_phase: lifted,
                    transit_height: out.im,
                    incoming_height: incoming.im,
                });
            }
        }
        z = gate.step(z);
        if !(z.re.is_finite() && z.im.is_finite()) || (entry.is_none() && escaped(z)) {
            return Err(AtlasError::NotInPetal);
        }
    }
    Err(AtlasError::DepthExhausted)
}
