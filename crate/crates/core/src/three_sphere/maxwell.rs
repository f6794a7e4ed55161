//! Source-free Maxwell fields on an annulus (`ω = 1`) in the normalised
//! Bessel representation, their tangential-trace norms, and the full-data
//! three-sphere inequality.

use super::{interpolate, interpolation_exponent, ratio, ThreeSphereCheck, ThreeSphereError};
use crate::media::Point;
use crate::specfun::{ln_double_factorial, spherical_bessel_with_derivative, vsh, BesselKind, CVec3};
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Coefficients of one `(n, m)`: `α₁ ĵ_n + α₂ ŷ_n` (the `V`-part of `H`) and
/// `β₁ ĵ_n + β₂ ŷ_n` (the `V`-part of `E`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaxwellTerm {
    pub n: usize,
    pub m: i64,
    pub alpha: [Complex64; 2],
    pub beta: [Complex64; 2],
}

/// `E = Σ √(n(n+1)) f_α/r Y x̂ + (r f_α)'/r U + f_β V`,
/// `H = i Σ √(n(n+1)) f_β/r Y x̂ + (r f_β)'/r U + f_α V`,
/// with `f_α = α₁ĵ_n + α₂ŷ_n`, `f_β = β₁ĵ_n + β₂ŷ_n`; solves `∇×E = iH`, `∇×H = −iE`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MaxwellModalField {
    pub terms: Vec<MaxwellTerm>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TraceNorm {
    /// `(Σ n³ (|α₁|²+|α₂|²+|β₁|²+|β₂|²) r^{2n})^{1/2}`, equivalence constants 1.
    Representative,
    /// `H^{−1/2}(div)` norm of the actual traces `(E×ν, H×ν)` pulled back to the
    /// unit sphere, via the multipliers `(1+n)^{−1/2}` and `(1+n(n+1))^{1/2}(1+n)^{−1/2}`.
    Trace,
}

/// `(ĵ_n, ĵ_n', ŷ_n, ŷ_n')` at `r`.
pub(crate) fn normalized_pair(n: usize, r: f64) -> Result<[f64; 4], ThreeSphereError> {
    let z = Complex64::new(r, 0.0);
    let (j, jp) = spherical_bessel_with_derivative(BesselKind::J, n, z)?;
    let (y, yp) = spherical_bessel_with_derivative(BesselKind::Y, n, z)?;
    let fj = ln_double_factorial(2 * n as i64 + 1).exp();
    let fy = -(-ln_double_factorial(2 * n as i64 - 1)).exp();
    Ok([j.to_c64().re * fj, jp.to_c64().re * fj, y.to_c64().re * fy, yp.to_c64().re * fy])
}

/// Spherical-frame components of one term: `([E_r, E_U, E_V], [H_r, H_U, H_V])`.
fn components(t: &MaxwellTerm, r: f64, b: &[f64; 4]) -> ([Complex64; 3], [Complex64; 3]) {
    let i = Complex64::new(0.0, 1.0);
    let lam = ((t.n * (t.n + 1)) as f64).sqrt();
    let f = |c: &[Complex64; 2]| c[0] * b[0] + c[1] * b[2];
    let df = |c: &[Complex64; 2]| c[0] * b[1] + c[1] * b[3];
    let (fa, fb) = (f(&t.alpha), f(&t.beta));
    let (ua, ub) = (fa / r + df(&t.alpha), fb / r + df(&t.beta));
    ([fa * lam / r, ua, fb], [i * lam * fb / r, i * ub, i * fa])
}

impl MaxwellModalField {
    pub fn max_degree(&self) -> usize {
        self.terms.iter().map(|t| t.n).max().unwrap_or(0)
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        MaxwellModalField {
            terms: self.terms.iter().map(|t| MaxwellTerm { n: t.n, m: t.m, alpha: t.alpha.map(|c| c * s), beta: t.beta.map(|c| c * s) }).collect(),
        }
    }

    /// `(E, H)` at `x`.
    pub fn eval(&self, x: &Point) -> Result<(CVec3, CVec3), ThreeSphereError> {
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        if !(r > 0.0) {
            return Err(ThreeSphereError::InvalidArgument("evaluation at the origin".into()));
        }
        let dir = [x[0] / r, x[1] / r, x[2] / r];
        let z = Complex64::new(0.0, 0.0);
        let (mut e, mut h) = ([z; 3], [z; 3]);
        for t in &self.terms {
            let b = normalized_pair(t.n, r)?;
            let (ce, ch) = components(t, r, &b);
            let v = vsh(t.n, t.m, &dir)?;
            for k in 0..3 {
                e[k] += ce[0] * v.radial[k] + ce[1] * v.gradient_tangent[k] + ce[2] * v.rotated_tangent[k];
                h[k] += ch[0] * v.radial[k] + ch[1] * v.gradient_tangent[k] + ch[2] * v.rotated_tangent[k];
            }
        }
        Ok((e, h))
    }

    /// Squared `H^{−1/2}(div)` norm of the actual traces at radius `r`.
    fn trace_norm_sq(&self, r: f64) -> Result<f64, ThreeSphereError> {
        let mut s = 0.0;
        for t in &self.terms {
            let b = normalized_pair(t.n, r)?;
            let (e, h) = components(t, r, &b);
            let n = t.n as f64;
            let div_w = (1.0 + n * (n + 1.0)) / (1.0 + n);
            // w = aU + bV ⇒ w×ν = bU − aV; only the U part has a surface divergence
            for (a, bv) in [(e[1], e[2]), (h[1], h[2])] {
                s += div_w * bv.norm_sqr() + a.norm_sqr() / (1.0 + n);
            }
        }
        Ok(s)
    }
}

/// The modal representative of `‖(E×ν, H×ν)‖_{H^{−1/2}(div, ∂B_r)}`: the square
/// root of `Σ n³ (|α₁|²+|α₂|²+|β₁|²+|β₂|²) r^{2n}`.
pub fn hminushalf_div_norm(field: &MaxwellModalField, r: f64) -> f64 {
    field
        .terms
        .iter()
        .map(|t| (t.n as f64).powi(3) * t.alpha.iter().chain(t.beta.iter()).map(|c| c.norm_sqr()).sum::<f64>() * r.powi(2 * t.n as i32))
        .sum::<f64>()
        .sqrt()
}

fn norm_at(field: &MaxwellModalField, r: f64, norm: TraceNorm) -> Result<f64, ThreeSphereError> {
    match norm {
        TraceNorm::Representative => Ok(hminushalf_div_norm(field, r)),
        TraceNorm::Trace => Ok(field.trace_norm_sq(r)?.sqrt()),
    }
}

/// Both sides of the three-sphere inequality for tangential traces; the ratio
/// is the constant this field requires.
pub fn check_maxwell_3sphere(field: &MaxwellModalField, r1: f64, r2: f64, r3: f64, norm: TraceNorm) -> Result<ThreeSphereCheck, ThreeSphereError> {
    let alpha = interpolation_exponent(r1, r2, r3)?;
    let lhs = norm_at(field, r2, norm)?;
    let rhs = interpolate(norm_at(field, r1, norm)?, norm_at(field, r3, norm)?, alpha);
    Ok(ThreeSphereCheck { lhs, rhs, alpha, ratio: ratio(lhs, rhs) })
}

/// Smallest constant valid for the whole family.
pub fn maxwell_constant(family: &[MaxwellModalField], r1: f64, r2: f64, r3: f64, norm: TraceNorm) -> Result<f64, ThreeSphereError> {
    let ratios: Vec<f64> = family.par_iter().map(|f| Ok(check_maxwell_3sphere(f, r1, r2, r3, norm)?.ratio)).collect::<Result<_, ThreeSphereError>>()?;
    Ok(ratios.into_iter().fold(0.0, f64::max))
}

/// A field with every `(n, m)`, `n ≤ N`, `N` uniform in `1..=n_max`, and
/// coefficients uniform in the unit square.
pub fn random_maxwell_field<R: Rng>(rng: &mut R, n_max: usize) -> MaxwellModalField {
    let top = rng.random_range(1..=n_max.max(1));
    let mut cplx = || Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let mut terms = Vec::new();
    for n in 1..=top {
        for m in -(n as i64)..=(n as i64) {
            terms.push(MaxwellTerm { n, m, alpha: [cplx(), cplx()], beta: [cplx(), cplx()] });
        }
    }
    MaxwellModalField { terms }
}

/// Closed form for a single `ĵ_n` coefficient in the trace norm:
/// `T(r)² = ((rĵ_n)'/r)² + (1+n(n+1)) ĵ_n²` (over `1+n`), and the ratio
/// `T(R₂) / (T(R₁)^α T(R₃)^{1−α})`.
pub fn single_mode_trace_ratio(n: usize, r1: f64, r2: f64, r3: f64) -> Result<f64, ThreeSphereError> {
    let alpha = interpolation_exponent(r1, r2, r3)?;
    let t = |r: f64| -> Result<f64, ThreeSphereError> {
        let [j, jp, _, _] = normalized_pair(n, r)?;
        let nf = n as f64;
        Ok((((j / r + jp).powi(2) + (1.0 + nf * (nf + 1.0)) * j * j) / (1.0 + nf)).sqrt())
    };
    Ok(t(r2)? / interpolate(t(r1)?, t(r3)?, alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layered_maxwell::curl_fd;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn representation_solves_maxwell() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = random_maxwell_field(&mut rng, 4);
        let i = Complex64::new(0.0, 1.0);
        for x in [[1.2, 0.3, -0.5], [0.2, 1.6, 0.9]] {
            let ce = curl_fd(&|p: &Point| Ok(f.eval(p).unwrap().0), &x, 1e-3).unwrap();
            let ch = curl_fd(&|p: &Point| Ok(f.eval(p).unwrap().1), &x, 1e-3).unwrap();
            let (e, h) = f.eval(&x).unwrap();
            let scale = e.iter().chain(h.iter()).map(|v| v.norm()).fold(0.0, f64::max);
            for k in 0..3 {
                assert!((ce[k] - i * h[k]).norm() < 1e-7 * scale);
                assert!((ch[k] + i * e[k]).norm() < 1e-7 * scale);
            }
        }
    }

    #[test]
    fn representative_norm_instances() {
        let one = MaxwellModalField { terms: vec![MaxwellTerm { n: 1, m: 0, alpha: [c(1.0), c(0.0)], beta: [c(0.0); 2] }] };
        assert_eq!(hminushalf_div_norm(&one, 1.0), 1.0);
        assert_eq!(hminushalf_div_norm(&MaxwellModalField::default(), 2.0), 0.0);
        let n3 = MaxwellModalField { terms: vec![MaxwellTerm { n: 3, m: 2, alpha: [c(0.0); 2], beta: [c(0.0), c(2.0)] }] };
        let (a, b) = (hminushalf_div_norm(&n3, 1.2), hminushalf_div_norm(&n3, 1.8));
        assert!(((b / a).powi(2) - (1.8f64 / 1.2).powi(6)).abs() < 1e-12 * (b / a).powi(2));
    }

    #[test]
    fn single_mode_ratios() {
        for n in [1, 5, 20] {
            let f = MaxwellModalField { terms: vec![MaxwellTerm { n, m: 0, alpha: [c(1.0), c(0.0)], beta: [c(0.0); 2] }] };
            let rep = check_maxwell_3sphere(&f, 1.0, 1.5, 2.0, TraceNorm::Representative).unwrap();
            assert!((rep.ratio - 1.0).abs() < 1e-12);
            let tr = check_maxwell_3sphere(&f, 1.0, 1.5, 2.0, TraceNorm::Trace).unwrap();
            let closed = single_mode_trace_ratio(n, 1.0, 1.5, 2.0).unwrap();
            assert!((tr.ratio - closed).abs() < 1e-12 * closed);
        }
    }
}
