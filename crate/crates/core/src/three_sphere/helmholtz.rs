//! `𝐇`-norms of Helmholtz/Laplace solutions on spheres, the full-data
//! three-sphere inequality, and partial-data measurements.

use super::planar::HarmonicExpansion2D;
use super::{interpolate, interpolation_exponent, ratio, ThreeSphereError};
use crate::media::{Mat3, Point};
use crate::quad::{gauss_legendre_on, sphere_rule};
use crate::specfun::{cyl_j, cyl_j_prime, cyl_y, cyl_y_prime, spherical_bessel_with_derivative, vsh, ylm, BesselKind};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dim {
    Two,
    Three,
}

/// One mode: `(a f_n(ωr) + b g_n(ωr)) Y_n^m` in 3D (`f, g = j, y`), or
/// `(a J_n(ωr) + b Y_n(ωr)) e^{inθ}` in 2D (`m` unused). For `ω = 0` the
/// Laplace solutions `r^n, r^{−n−1}` (3D) or `r^{|n|}, r^{−|n|}` / `ln r` (2D) are used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HelmholtzTerm {
    pub n: i64,
    pub m: i64,
    pub a: Complex64,
    pub b: Complex64,
}

/// A finite solution of `Δv + ω²v = 0` on an annulus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HelmholtzExpansion {
    pub dim: Dim,
    pub omega: f64,
    pub terms: Vec<HelmholtzTerm>,
}

impl HelmholtzExpansion {
    pub fn new(dim: Dim, omega: f64, terms: Vec<HelmholtzTerm>) -> Result<Self, ThreeSphereError> {
        if !(omega >= 0.0) || !omega.is_finite() {
            return Err(ThreeSphereError::InvalidArgument(format!("omega = {omega}")));
        }
        for t in &terms {
            if dim == Dim::Three && (t.n < 0 || t.m.abs() > t.n) {
                return Err(ThreeSphereError::InvalidArgument(format!("mode ({}, {})", t.n, t.m)));
            }
        }
        Ok(HelmholtzExpansion { dim, omega, terms })
    }

    pub fn max_degree(&self) -> usize {
        self.terms.iter().map(|t| t.n.unsigned_abs() as usize).max().unwrap_or(0)
    }

    /// Radial value and `r`-derivative of each term.
    fn radial(&self, r: f64) -> Result<Vec<(Complex64, Complex64)>, ThreeSphereError> {
        if !(r > 0.0) {
            return Err(ThreeSphereError::InvalidArgument(format!("radius {r}")));
        }
        let w = self.omega;
        self.terms
            .iter()
            .map(|t| {
                let (f, df, g, dg) = match (self.dim, w == 0.0) {
                    (Dim::Three, true) => {
                        let n = t.n as i32;
                        (r.powi(n), t.n as f64 * r.powi(n - 1), r.powi(-n - 1), -(t.n as f64 + 1.0) * r.powi(-n - 2))
                    }
                    (Dim::Three, false) => {
                        let z = Complex64::new(w * r, 0.0);
                        let (j, jp) = spherical_bessel_with_derivative(BesselKind::J, t.n as usize, z)?;
                        let (y, yp) = spherical_bessel_with_derivative(BesselKind::Y, t.n as usize, z)?;
                        (j.to_c64().re, w * jp.to_c64().re, y.to_c64().re, w * yp.to_c64().re)
                    }
                    (Dim::Two, true) => {
                        let h = HarmonicExpansion2D { terms: vec![(t.n, Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)), (t.n, Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0))] };
                        let rad = h.radial(r);
                        (rad[0].1.re, rad[0].2.re, rad[1].1.re, rad[1].2.re)
                    }
                    (Dim::Two, false) => (cyl_j(t.n, w * r), w * cyl_j_prime(t.n, w * r), cyl_y(t.n, w * r), w * cyl_y_prime(t.n, w * r)),
                };
                Ok((t.a * f + t.b * g, t.a * df + t.b * dg))
            })
            .collect()
    }

    /// Coefficients in the orthonormal angular basis of the unit sphere/circle,
    /// merged per `(n, m)`: `(degree, value, ∂_r value)`.
    fn modal(&self, r: f64) -> Result<Vec<(u64, Complex64, Complex64)>, ThreeSphereError> {
        let scale = match self.dim {
            Dim::Three => 1.0,
            Dim::Two => (2.0 * PI).sqrt(),
        };
        let mut merged: BTreeMap<(i64, i64), (Complex64, Complex64)> = BTreeMap::new();
        for (t, (f, df)) in self.terms.iter().zip(self.radial(r)?) {
            let key = (t.n, if self.dim == Dim::Three { t.m } else { 0 });
            let e = merged.entry(key).or_default();
            e.0 += f * scale;
            e.1 += df * scale;
        }
        Ok(merged.into_iter().map(|((n, _), (f, df))| (n.unsigned_abs(), f, df)).collect())
    }

    /// `(v, ∇v)` at a point of `ℝ³` (3D expansions only).
    pub fn value_and_gradient(&self, x: &Point) -> Result<(Complex64, [Complex64; 3]), ThreeSphereError> {
        if self.dim != Dim::Three {
            return Err(ThreeSphereError::InvalidArgument("pointwise evaluation is implemented for 3D expansions".into()));
        }
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        let dir = [x[0] / r, x[1] / r, x[2] / r];
        let mut v = Complex64::new(0.0, 0.0);
        let mut g = [Complex64::new(0.0, 0.0); 3];
        for (t, (f, df)) in self.terms.iter().zip(self.radial(r)?) {
            let n = t.n as usize;
            let (y, u) = if n == 0 { (ylm(0, 0, &dir)?, [Complex64::new(0.0, 0.0); 3]) } else {
                let b = vsh(n, t.m, &dir)?;
                (b.y, b.gradient_tangent)
            };
            let lam = ((n * (n + 1)) as f64).sqrt();
            v += f * y;
            for k in 0..3 {
                g[k] += df * y * dir[k] + f / r * lam * u[k];
            }
        }
        Ok((v, g))
    }
}

/// An `𝐇`-norm value; `exact` is false when a quadrature approximation was used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HNorm {
    pub value: f64,
    pub exact: bool,
}

/// `(Σ (1+n)|v_n|²)^{1/2} + (Σ (1+n)^{−1}|q_n|²)^{1/2}` on modal coefficients.
fn modal_hnorm(modes: &[(u64, Complex64, Complex64)]) -> f64 {
    let half: f64 = modes.iter().map(|(n, f, _)| (1.0 + *n as f64) * f.norm_sqr()).sum();
    let minus: f64 = modes.iter().map(|(n, _, q)| q.norm_sqr() / (1.0 + *n as f64)).sum();
    half.sqrt() + minus.sqrt()
}

/// `‖v‖_{H^{1/2}(∂B_r)} + ‖∂_r v‖_{H^{−1/2}(∂B_r)}` for `𝓜 = I`, exact: the
/// fractional norms are the multipliers `(1+n)^{±1/2}` on the coefficients of
/// the trace pulled back to the unit sphere (unit circle in 2D).
pub fn hnorm_sphere(v: &HelmholtzExpansion, r: f64) -> Result<HNorm, ThreeSphereError> {
    Ok(HNorm { value: modal_hnorm(&v.modal(r)?), exact: true })
}

/// [`hnorm_sphere`] for a planar harmonic expansion.
pub fn hnorm_circle(v: &HarmonicExpansion2D, r: f64) -> Result<HNorm, ThreeSphereError> {
    if !(r > 0.0) {
        return Err(ThreeSphereError::InvalidArgument(format!("radius {r}")));
    }
    let s = (2.0 * PI).sqrt();
    let mut merged: BTreeMap<i64, (Complex64, Complex64)> = BTreeMap::new();
    for (k, f, df) in v.radial(r) {
        let e = merged.entry(k).or_default();
        e.0 += f * s;
        e.1 += df * s;
    }
    let modes: Vec<_> = merged.into_iter().map(|(k, (f, d))| (k.unsigned_abs(), f, d)).collect();
    Ok(HNorm { value: modal_hnorm(&modes), exact: true })
}

/// `𝐇`-norm with a general tensor: the conormal flux `𝓜∇v·e_r` is sampled on a
/// product rule and projected onto harmonics of degree `≤ degree_cap` (approximate).
pub fn hnorm_sphere_with_tensor(v: &HelmholtzExpansion, tensor: &(dyn Fn(&Point) -> Mat3 + Sync), r: f64, degree_cap: usize) -> Result<HNorm, ThreeSphereError> {
    if v.dim != Dim::Three {
        return Err(ThreeSphereError::InvalidArgument("tensor path is 3D only".into()));
    }
    let modes = v.modal(r)?;
    let half: f64 = modes.iter().map(|(n, f, _)| (1.0 + *n as f64) * f.norm_sqr()).sum();
    let nt = (degree_cap + v.max_degree()) / 2 + 8;
    let rule = sphere_rule(nt, 2 * nt + 2);
    let flux: Vec<(Point, f64, Complex64)> = rule
        .par_iter()
        .map(|(d, w)| {
            let x = [r * d[0], r * d[1], r * d[2]];
            let (_, g) = v.value_and_gradient(&x)?;
            let m = tensor(&x);
            let mut q = Complex64::new(0.0, 0.0);
            for i in 0..3 {
                for j in 0..3 {
                    q += d[i] * m[(i, j)] * g[j];
                }
            }
            Ok((*d, *w, q))
        })
        .collect::<Result<_, ThreeSphereError>>()?;
    let mut minus = 0.0;
    for n in 0..=degree_cap {
        for m in -(n as i64)..=(n as i64) {
            let mut c = Complex64::new(0.0, 0.0);
            for (d, w, q) in &flux {
                c += q * ylm(n, m, d)?.conj() * *w;
            }
            minus += c.norm_sqr() / (1.0 + n as f64);
        }
    }
    Ok(HNorm { value: half.sqrt() + minus.sqrt(), exact: false })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThreeSphereCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub alpha: f64,
    pub ratio: f64,
}

/// `‖v‖_{𝐇(∂B_{R₂})}` against `‖v‖^{α₀}_{𝐇(∂B_{R₁})} ‖v‖^{1−α₀}_{𝐇(∂B_{R₃})}`; the
/// ratio is the smallest constant that works for this `v`.
pub fn check_helmholtz_3sphere(v: &HelmholtzExpansion, r1: f64, r2: f64, r3: f64) -> Result<ThreeSphereCheck, ThreeSphereError> {
    let alpha = interpolation_exponent(r1, r2, r3)?;
    let lhs = hnorm_sphere(v, r2)?.value;
    let rhs = interpolate(hnorm_sphere(v, r1)?.value, hnorm_sphere(v, r3)?.value, alpha);
    Ok(ThreeSphereCheck { lhs, rhs, alpha, ratio: ratio(lhs, rhs) })
}

/// Smallest `C` valid for every member of `family`.
pub fn helmholtz_constant(family: &[HelmholtzExpansion], r1: f64, r2: f64, r3: f64) -> Result<f64, ThreeSphereError> {
    let ratios: Vec<f64> = family.par_iter().map(|v| Ok(check_helmholtz_3sphere(v, r1, r2, r3)?.ratio)).collect::<Result<_, ThreeSphereError>>()?;
    Ok(ratios.into_iter().fold(0.0, f64::max))
}

/// The circle `{x ∈ ∂B_R : angle(x, axis) = polar}`; `polar = π/2` is a great circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleCurve {
    pub axis: [f64; 3],
    pub polar: f64,
}

impl CircleCurve {
    pub fn equator() -> Self {
        CircleCurve { axis: [0.0, 0.0, 1.0], polar: PI / 2.0 }
    }
}

/// `Σ_{r₀} = ∂B_{R₁} ∖ Ō_{r₀}`, `O_{r₀}` the points within distance `r₀` of the curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartialBoundary {
    pub radius: f64,
    pub curve: CircleCurve,
    pub r0: f64,
}

impl PartialBoundary {
    pub fn new(radius: f64, curve: CircleCurve, r0: f64) -> Result<Self, ThreeSphereError> {
        let a = curve.axis;
        let norm = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
        if !(radius > 0.0) || !(r0 >= 0.0) || !(norm > 0.0) || !(0.0..=PI).contains(&curve.polar) {
            return Err(ThreeSphereError::InvalidArgument(format!("radius {radius}, r0 {r0}, curve {curve:?}")));
        }
        let s = PartialBoundary { radius, curve: CircleCurve { axis: [a[0] / norm, a[1] / norm, a[2] / norm], polar: curve.polar }, r0 };
        if s.bands().is_empty() {
            return Err(ThreeSphereError::EmptyBoundary { r0, radius });
        }
        Ok(s)
    }

    /// Angular half-width of the excision: the chord `2R sin(ψ/2)` equals `r₀`.
    pub fn half_width(&self) -> f64 {
        if self.r0 >= 2.0 * self.radius {
            PI
        } else {
            2.0 * (self.r0 / (2.0 * self.radius)).asin()
        }
    }

    /// Remaining polar intervals, measured from the curve axis.
    fn bands(&self) -> Vec<(f64, f64)> {
        let w = self.half_width();
        let (lo, hi) = (self.curve.polar - w, self.curve.polar + w);
        let mut out = Vec::new();
        if self.r0 == 0.0 {
            return vec![(0.0, PI)];
        }
        if lo > 0.0 {
            out.push((0.0, lo));
        }
        if hi < PI {
            out.push((hi, PI));
        }
        out
    }

    /// Physical points of `Σ` and area weights.
    pub fn rule(&self, n_theta: usize, n_phi: usize) -> Vec<(Point, f64)> {
        let ax = self.curve.axis;
        // any unit vector not parallel to the axis completes the frame
        let seed = if ax[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
        let dot = seed[0] * ax[0] + seed[1] * ax[1] + seed[2] * ax[2];
        let mut e1 = [seed[0] - dot * ax[0], seed[1] - dot * ax[1], seed[2] - dot * ax[2]];
        let n1 = (e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]).sqrt();
        e1 = [e1[0] / n1, e1[1] / n1, e1[2] / n1];
        let e2 = [ax[1] * e1[2] - ax[2] * e1[1], ax[2] * e1[0] - ax[0] * e1[2], ax[0] * e1[1] - ax[1] * e1[0]];
        let r = self.radius;
        let wphi = 2.0 * PI / n_phi as f64;
        let mut out = Vec::new();
        for (a, b) in self.bands() {
            for (t, wt) in gauss_legendre_on(n_theta, a, b) {
                let (st, ct) = t.sin_cos();
                for k in 0..n_phi {
                    let (sp, cp) = ((k as f64 + 0.5) * wphi).sin_cos();
                    let p: Point = std::array::from_fn(|i| r * (st * (cp * e1[i] + sp * e2[i]) + ct * ax[i]));
                    out.push((p, wt * wphi * st * r * r));
                }
            }
        }
        out
    }
}

/// The frozen partial-data surrogate `(∫_Σ |v|² + |∇v|² dS)^{1/2}` with a
/// quadrature sized from the expansion degree.
pub fn partial_data_norm(v: &HelmholtzExpansion, sigma: &PartialBoundary) -> Result<f64, ThreeSphereError> {
    let nt = (2 * v.max_degree() + 16).max(32);
    partial_data_norm_with(v, sigma, nt, 2 * nt)
}

pub fn partial_data_norm_with(v: &HelmholtzExpansion, sigma: &PartialBoundary, n_theta: usize, n_phi: usize) -> Result<f64, ThreeSphereError> {
    let parts: Vec<f64> = sigma
        .rule(n_theta, n_phi)
        .par_iter()
        .map(|(x, w)| {
            let (f, g) = v.value_and_gradient(x)?;
            Ok(w * (f.norm_sqr() + g.iter().map(|z| z.norm_sqr()).sum::<f64>()))
        })
        .collect::<Result<_, ThreeSphereError>>()?;
    Ok(parts.iter().sum::<f64>().sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaRow {
    /// Partial-data term on `Σ_{r₀}`.
    pub partial: f64,
    /// `‖v‖_{𝐇(∂B_{R₂})}`.
    pub middle: f64,
    /// `‖v‖_{𝐇(∂B_{R₃})}`.
    pub outer: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaReport {
    pub r0: f64,
    pub alpha0: f64,
    pub alpha_hat: f64,
    pub intercept: f64,
    pub rows: Vec<AlphaRow>,
}

/// Fits `ln(middle/outer) ≈ c + α̂ ln(partial/outer)` over the family: the
/// exponent with which the partial data controls the middle sphere.
pub fn empirical_alpha(family: &[HelmholtzExpansion], sigma: &PartialBoundary, r2: f64, r3: f64) -> Result<AlphaReport, ThreeSphereError> {
    const MIN: usize = 10;
    if family.len() < MIN {
        return Err(ThreeSphereError::FamilyTooSmall { size: family.len(), min: MIN });
    }
    let alpha0 = interpolation_exponent(sigma.radius, r2, r3)?;
    let rows: Vec<AlphaRow> = family
        .par_iter()
        .map(|v| Ok(AlphaRow { partial: partial_data_norm(v, sigma)?, middle: hnorm_sphere(v, r2)?.value, outer: hnorm_sphere(v, r3)?.value }))
        .collect::<Result<_, ThreeSphereError>>()?;
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| ((r.partial / r.outer).ln(), (r.middle / r.outer).ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if !(sxx > 0.0) || !sxx.is_finite() {
        return Err(ThreeSphereError::InvalidArgument("family has no spread in the partial-data term".into()));
    }
    let alpha_hat = sxy / sxx;
    Ok(AlphaReport { r0: sigma.r0, alpha0, alpha_hat, intercept: my - alpha_hat * mx, rows })
}
