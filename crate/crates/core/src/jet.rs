//! Truncated Taylor series used to differentiate iterates to high order.

use crate::family::{MapKernel, C64};
use std::ops::{Add, Mul, Sub};

pub const ORDER: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub c: [C64; ORDER],
}

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

impl Jet {
    pub fn zero() -> Self {
        Jet { c: [ZERO; ORDER] }
    }

    pub fn constant(v: C64) -> Self {
        let mut j = Self::zero();
        j.c[0] = v;
        j
    }

    /// The identity germ z0 + t.
    pub fn variable(z0: C64) -> Self {
        let mut j = Self::constant(z0);
        j.c[1] = C64::new(1.0, 0.0);
        j
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut r = *self;
        for v in r.c.iter_mut() {
            *v *= s;
        }
        r
    }

    pub fn recip(&self) -> Self {
        Jet::constant(C64::new(1.0, 0.0)).div(self)
    }

    pub fn div(&self, b: &Jet) -> Self {
        let mut q = Jet::zero();
        let inv = b.c[0].inv();
        for i in 0..ORDER {
            let mut s = self.c[i];
            for k in 0..i {
                s -= q.c[k] * b.c[i - k];
            }
            q.c[i] = s * inv;
        }
        q
    }

    /// log of a series with constant term 1.
    pub fn log1(&self) -> Self {
        let mut y = *self;
        y.c[0] = ZERO;
        let mut res = Jet::zero();
        let mut p = Jet::constant(C64::new(1.0, 0.0));
        for k in 1..ORDER {
            p = p * y;
            let s = if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64;
            res = res + p.scale(C64::new(s, 0.0));
        }
        res
    }

    /// Multiplies by t^k, dropping overflow.
    pub fn shift(&self, k: usize) -> Self {
        let mut r = Jet::zero();
        for i in k..ORDER {
            r.c[i] = self.c[i - k];
        }
        r
    }

    pub fn poly(coeffs: &[C64], x: &Jet) -> Jet {
        let mut r = Jet::constant(*coeffs.last().unwrap());
        for c in coeffs.iter().rev().skip(1) {
            r = r * *x;
            r.c[0] += *c;
        }
        r
    }

    pub fn conj_coeffs(&self) -> Self {
        let mut r = *self;
        for v in r.c.iter_mut() {
            *v = v.conj();
        }
        r
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, b: Jet) -> Jet {
        let mut r = self;
        for i in 0..ORDER {
            r.c[i] += b.c[i];
        }
        r
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, b: Jet) -> Jet {
        let mut r = self;
        for i in 0..ORDER {
            r.c[i] -= b.c[i];
        }
        r
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, b: Jet) -> Jet {
        let mut r = Jet::zero();
        for i in 0..ORDER {
            if self.c[i] == ZERO {
                continue;
            }
            for k in 0..ORDER - i {
                r.c[i + k] += self.c[i] * b.c[k];
            }
        }
        r
    }
}

impl MapKernel {
    pub fn map_jet(&self, x: &Jet) -> Jet {
        let (num, den) = self.coefficients();
        Jet::poly(num, x).div(&Jet::poly(den, x))
    }

    /// Taylor coefficients of the k-fold iterate at z.
    pub fn iterate_jet(&self, z: C64, k: usize) -> Jet {
        let mut j = Jet::variable(z);
        for _ in 0..k {
            j = self.map_jet(&j);
        }
        j
    }

    /// Taylor coefficients of G, the holomorphic part of the half-return, at z.
    pub fn half_return_jet(&self, z: C64, n: usize) -> Jet {
        let j = self.iterate_jet(z, n);
        match self.family() {
            crate::family::Family::NewtonQuartic => j,
            crate::family::Family::AntipodalCubic => j.recip().scale(C64::new(-1.0, 0.0)),
        }
    }
}
