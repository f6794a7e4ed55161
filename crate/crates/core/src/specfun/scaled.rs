//! Complex numbers carried as (mantissa, decimal exponent).
//!
//! Spherical Bessel functions of high order at small argument leave the
//! `f64` range long before the physics stops caring about them, so every
//! recurrence in this crate runs on [`Scaled`].

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::LN_10;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// `m * 10^e` with `1 <= |m| < 10` (or `m == 0`, `e == 0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scaled {
    pub m: Complex64,
    pub e: i64,
}

impl Scaled {
    pub const ZERO: Scaled = Scaled { m: Complex64 { re: 0.0, im: 0.0 }, e: 0 };
    pub const ONE: Scaled = Scaled { m: Complex64 { re: 1.0, im: 0.0 }, e: 0 };

    pub fn new(m: Complex64, e: i64) -> Self {
        Scaled { m, e }.normalized()
    }

    pub fn from_c64(c: Complex64) -> Self {
        Scaled { m: c, e: 0 }.normalized()
    }

    pub fn from_f64(x: f64) -> Self {
        Self::from_c64(Complex64::new(x, 0.0))
    }

    /// `c * exp(ln_mag)` without forming `exp(ln_mag)`.
    pub fn from_c64_ln(c: Complex64, ln_mag: f64) -> Self {
        let d = ln_mag / LN_10;
        let e = d.floor();
        let frac = d - e;
        Scaled { m: c * 10f64.powf(frac), e: e as i64 }.normalized()
    }

    fn normalized(self) -> Self {
        let a = self.m.norm();
        if a == 0.0 || !a.is_finite() {
            if a == 0.0 {
                return Scaled::ZERO;
            }
            return self;
        }
        let k = a.log10().floor() as i64;
        let mut m = self.m * 10f64.powi(-(k as i32));
        let mut e = self.e + k;
        // guard against log10 rounding at decade boundaries
        let am = m.norm();
        if am >= 10.0 {
            m /= 10.0;
            e += 1;
        } else if am < 1.0 {
            m *= 10.0;
            e -= 1;
        }
        Scaled { m, e }
    }

    pub fn is_zero(&self) -> bool {
        self.m.re == 0.0 && self.m.im == 0.0
    }

    /// Converts back to `f64` arithmetic; overflows to infinity, underflows to zero.
    pub fn to_c64(&self) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        if self.e > 308 {
            return Complex64::new(
                if self.m.re == 0.0 { 0.0 } else { f64::INFINITY * self.m.re.signum() },
                if self.m.im == 0.0 { 0.0 } else { f64::INFINITY * self.m.im.signum() },
            );
        }
        if self.e < -330 {
            return Complex64::new(0.0, 0.0);
        }
        // split the power to avoid intermediate overflow near the edges
        let h = self.e / 2;
        self.m * 10f64.powi(h as i32) * 10f64.powi((self.e - h) as i32)
    }

    /// True when [`to_c64`](Self::to_c64) is exact up to rounding.
    pub fn fits_f64(&self) -> bool {
        self.is_zero() || (-300..=300).contains(&self.e)
    }

    /// Natural log of the modulus (`-inf` for zero).
    pub fn ln_abs(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        self.m.norm().ln() + self.e as f64 * LN_10
    }

    pub fn abs(&self) -> Scaled {
        Scaled { m: Complex64::new(self.m.norm(), 0.0), e: self.e }
    }

    pub fn conj(&self) -> Scaled {
        Scaled { m: self.m.conj(), e: self.e }
    }

    pub fn scale(&self, c: Complex64) -> Scaled {
        Scaled { m: self.m * c, e: self.e }.normalized()
    }

    pub fn recip(&self) -> Scaled {
        Scaled { m: self.m.inv(), e: -self.e }.normalized()
    }

    /// `self / other` as a plain complex number (for ratios known to be moderate).
    pub fn ratio(&self, other: &Scaled) -> Complex64 {
        (*self / *other).to_c64()
    }
}

impl Mul for Scaled {
    type Output = Scaled;
    fn mul(self, o: Scaled) -> Scaled {
        Scaled { m: self.m * o.m, e: self.e + o.e }.normalized()
    }
}

impl Div for Scaled {
    type Output = Scaled;
    fn div(self, o: Scaled) -> Scaled {
        Scaled { m: self.m / o.m, e: self.e - o.e }.normalized()
    }
}

impl Add for Scaled {
    type Output = Scaled;
    fn add(self, o: Scaled) -> Scaled {
        if self.is_zero() {
            return o;
        }
        if o.is_zero() {
            return self;
        }
        let (big, small) = if self.e >= o.e { (self, o) } else { (o, self) };
        let d = big.e - small.e;
        if d > 40 {
            return big;
        }
        Scaled { m: big.m + small.m * 10f64.powi(-(d as i32)), e: big.e }.normalized()
    }
}

impl Sub for Scaled {
    type Output = Scaled;
    fn sub(self, o: Scaled) -> Scaled {
        self + (-o)
    }
}

impl Neg for Scaled {
    type Output = Scaled;
    fn neg(self) -> Scaled {
        Scaled { m: -self.m, e: self.e }
    }
}

impl Mul<Complex64> for Scaled {
    type Output = Scaled;
    fn mul(self, c: Complex64) -> Scaled {
        self.scale(c)
    }
}

impl Mul<f64> for Scaled {
    type Output = Scaled;
    fn mul(self, c: f64) -> Scaled {
        self.scale(Complex64::new(c, 0.0))
    }
}
