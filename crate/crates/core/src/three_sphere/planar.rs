//! Harmonic functions on planar annuli and the Hadamard three-circle inequality.

use super::{interpolate, interpolation_exponent, ratio, ThreeSphereError};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// `v = Σ_k a_k r^{|k|} e^{ikθ} + b_k r^{−|k|} e^{ikθ}`, with `ln r` in place of
/// `r^{−0}` for `k = 0` so that the two families stay independent.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct HarmonicExpansion2D {
    /// `(k, a_k, b_k)`.
    pub terms: Vec<(i64, Complex64, Complex64)>,
}

impl HarmonicExpansion2D {
    /// The holomorphic polynomial `Σ c_k z^k`.
    pub fn polynomial(coefficients: &[Complex64]) -> Self {
        HarmonicExpansion2D { terms: coefficients.iter().enumerate().map(|(k, c)| (k as i64, *c, Complex64::new(0.0, 0.0))).collect() }
    }

    pub fn max_order(&self) -> u64 {
        self.terms.iter().map(|(k, _, _)| k.unsigned_abs()).max().unwrap_or(0)
    }

    fn singular(&self) -> bool {
        self.terms.iter().any(|(_, _, b)| *b != Complex64::new(0.0, 0.0))
    }

    /// Radial profile of mode `k` and its `r`-derivative.
    pub(crate) fn radial(&self, r: f64) -> Vec<(i64, Complex64, Complex64)> {
        self.terms
            .iter()
            .map(|&(k, a, b)| {
                let n = k.unsigned_abs() as i32;
                let nf = n as f64;
                let (reg, dreg) = (r.powi(n), if n == 0 { 0.0 } else { nf * r.powi(n - 1) });
                let (sing, dsing) = if n == 0 { (r.ln(), 1.0 / r) } else { (r.powi(-n), -nf * r.powi(-n - 1)) };
                (k, a * reg + b * sing, a * dreg + b * dsing)
            })
            .collect()
    }

    pub fn eval(&self, r: f64, theta: f64) -> Complex64 {
        self.radial(r).iter().map(|(k, f, _)| f * Complex64::from_polar(1.0, *k as f64 * theta)).sum()
    }
}

fn check_radius(v: &HarmonicExpansion2D, r: f64) -> Result<(), ThreeSphereError> {
    if !(r >= 0.0) || !r.is_finite() || (r == 0.0 && v.singular()) {
        return Err(ThreeSphereError::InvalidArgument(format!("radius {r} outside the annulus of validity")));
    }
    Ok(())
}

/// Maximises `g` on `[a, b]` by golden-section search.
fn golden_max(g: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let inv = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv * (b - a);
    let mut d = a + inv * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    while (b - a).abs() > 1e-11 {
        if gc > gd {
            b = d;
            d = c;
            gd = gc;
            c = b - inv * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + inv * (b - a);
            gd = g(d);
        }
    }
    gc.max(gd)
}

/// `‖v‖_{L∞(∂B_R)}` by dense sampling plus golden-section refinement of the
/// largest local maxima.
pub fn sup_norm_circle(v: &HarmonicExpansion2D, radius: f64) -> Result<f64, ThreeSphereError> {
    check_radius(v, radius)?;
    let radial = v.radial(radius);
    // |Σ f_k e^{ikθ}| = |Σ f_k w^{k−k_min}| with w = e^{iθ}: one Horner pass per sample
    let k_min = radial.iter().map(|(k, _, _)| *k).min().unwrap_or(0);
    let k_max = radial.iter().map(|(k, _, _)| *k).max().unwrap_or(0);
    let mut dense = vec![Complex64::new(0.0, 0.0); (k_max - k_min + 1) as usize];
    for (k, f, _) in &radial {
        dense[(k - k_min) as usize] += f;
    }
    let abs_at = |t: f64| {
        let w = Complex64::from_polar(1.0, t);
        dense.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * w + c).norm()
    };
    let n = (64 * (v.max_order() as usize + 1)).max(512);
    let h = 2.0 * PI / n as f64;
    let samples: Vec<f64> = (0..n).map(|i| abs_at(i as f64 * h)).collect();
    let top = samples.iter().cloned().fold(0.0, f64::max);
    if top == 0.0 {
        return Ok(0.0);
    }
    let mut peaks: Vec<usize> = (0..n).filter(|&i| samples[i] >= samples[(i + n - 1) % n] && samples[i] >= samples[(i + 1) % n] && samples[i] >= 0.5 * top).collect();
    peaks.sort_by(|&i, &j| samples[j].partial_cmp(&samples[i]).expect("finite samples"));
    peaks.truncate(16);
    let best = peaks.iter().map(|&i| golden_max(&abs_at, (i as f64 - 1.0) * h, (i as f64 + 1.0) * h)).fold(top, f64::max);
    Ok(best)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HadamardCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub alpha: f64,
    pub ratio: f64,
}

/// `‖v‖_{∂B_{R₂}} ≤ ‖v‖^α_{∂B_{R₁}} ‖v‖^{1−α}_{∂B_{R₃}}` in the sup norm.
pub fn check_hadamard(v: &HarmonicExpansion2D, r1: f64, r2: f64, r3: f64) -> Result<HadamardCheck, ThreeSphereError> {
    let alpha = interpolation_exponent(r1, r2, r3)?;
    let lhs = sup_norm_circle(v, r2)?;
    let rhs = interpolate(sup_norm_circle(v, r1)?, sup_norm_circle(v, r3)?, alpha);
    Ok(HadamardCheck { lhs, rhs, alpha, ratio: ratio(lhs, rhs) })
}

/// Holomorphic polynomial of degree `degree` with coefficients uniform in the unit square.
pub fn random_holomorphic<R: Rng>(rng: &mut R, degree: usize) -> HarmonicExpansion2D {
    let c: Vec<Complex64> = (0..=degree).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    HarmonicExpansion2D::polynomial(&c)
}
