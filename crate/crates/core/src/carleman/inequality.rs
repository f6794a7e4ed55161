//! The weight `e^{βr^{-p}}`: its divergence identity, the weighted inequality
//! measured by quadrature, and the radius/exponent bookkeeping.

use super::{b_matrix, claim2_ratio, tensor_gradient, CarlemanError, TensorField, WeightParams};
use crate::media::{Mat3, Point};
use crate::quad::{composite_gauss_legendre, sphere_rule};
use nalgebra::Vector3;
use rayon::prelude::*;
use serde::Serialize;

fn norm(x: &Point) -> f64 {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

fn vec3(x: &Point) -> Vector3<f64> {
    Vector3::new(x[0], x[1], x[2])
}

/// Closed form versus finite differences for `div(M∇e^{−βr^{−p}})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightIdentity {
    pub closed: f64,
    pub numeric: f64,
    /// `|closed − numeric| / |closed|` (zero when both vanish).
    pub residual: f64,
}

/// `div(M∇e^{−βr^{−p}}) = pβe^{−βr^{−p}}[pβr^{−2p−4} − (p+2)r^{−p−4}] x·Mx + pβr^{−p−2}e^{−βr^{−p}} div(Mx)`,
/// checked against nested central differences of step `h` (both the
/// gradient of the weight and the divergence are differenced).
pub fn weight_derivative_identity(params: &WeightParams, m: &dyn TensorField, x: &Point, h: f64) -> Result<WeightIdentity, CarlemanError> {
    let r = norm(x);
    if r == 0.0 {
        return Err(CarlemanError::InvalidArgument("the weight identity needs x ≠ 0".into()));
    }
    let (beta, p) = (params.beta, params.p);
    let w = |y: &Point| (-beta * norm(y).powf(-p)).exp();
    let xv = vec3(x);
    let mm = m.eval(x);
    let dm = tensor_gradient(m, x, h.min(1e-5));
    let div_mx: f64 = mm.trace() + (0..3).map(|j| (dm[j] * xv)[j]).sum::<f64>();
    let e = w(x);
    let closed = p * beta * e * (p * beta * r.powf(-2.0 * p - 4.0) - (p + 2.0) * r.powf(-p - 4.0)) * xv.dot(&(mm * xv))
        + p * beta * r.powf(-p - 2.0) * e * div_mx;
    let flux = |y: &Point| -> Vector3<f64> {
        let g = Vector3::from_fn(|k, _| {
            let mut a = *y;
            let mut b = *y;
            a[k] += h;
            b[k] -= h;
            (w(&a) - w(&b)) / (2.0 * h)
        });
        m.eval(y) * g
    };
    let numeric: f64 = (0..3)
        .map(|k| {
            let mut a = *x;
            let mut b = *x;
            a[k] += h;
            b[k] -= h;
            (flux(&a)[k] - flux(&b)[k]) / (2.0 * h)
        })
        .sum();
    let residual = if closed == 0.0 && numeric == 0.0 { 0.0 } else { (closed - numeric).abs() / closed.abs().max(f64::MIN_POSITIVE) };
    Ok(WeightIdentity { closed, numeric, residual })
}

/// A twice differentiable test function with analytic derivatives.
pub trait TestFunction: Sync {
    fn value(&self, x: &Point) -> f64;
    fn gradient(&self, x: &Point) -> Vector3<f64>;
    fn hessian(&self, x: &Point) -> Mat3;
    /// Radii outside which the function vanishes identically, if any.
    fn radial_support(&self) -> Option<(f64, f64)> {
        None
    }
}

/// `v(x) = ψ(|x|)(1 + τ·x)` with the smooth bump
/// `ψ(r) = exp(−1/(1 − t²))`, `t = (2r − a − b)/(b − a)`, supported in `a < r < b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialBump {
    pub inner: f64,
    pub outer: f64,
    pub tilt: [f64; 3],
}

impl RadialBump {
    /// `(ψ, ψ', ψ'')` in `r`.
    fn profile(&self, r: f64) -> (f64, f64, f64) {
        let c = 2.0 / (self.outer - self.inner);
        let t = c * r - (self.inner + self.outer) / (self.outer - self.inner);
        let u = 1.0 - t * t;
        if u <= 0.0 {
            return (0.0, 0.0, 0.0);
        }
        let psi = (-1.0 / u).exp();
        if psi == 0.0 {
            return (0.0, 0.0, 0.0);
        }
        let g1 = -2.0 * t / (u * u);
        let g2 = -2.0 / (u * u) - 8.0 * t * t / (u * u * u);
        (psi, psi * g1 * c, psi * (g1 * g1 + g2) * c * c)
    }

    fn tilt(&self) -> Vector3<f64> {
        Vector3::new(self.tilt[0], self.tilt[1], self.tilt[2])
    }
}

impl TestFunction for RadialBump {
    fn value(&self, x: &Point) -> f64 {
        let (psi, _, _) = self.profile(norm(x));
        psi * (1.0 + self.tilt().dot(&vec3(x)))
    }

    fn gradient(&self, x: &Point) -> Vector3<f64> {
        let r = norm(x);
        let (psi, d1, _) = self.profile(r);
        let xv = vec3(x);
        let q = 1.0 + self.tilt().dot(&xv);
        xv * (d1 / r * q) + self.tilt() * psi
    }

    fn hessian(&self, x: &Point) -> Mat3 {
        let r = norm(x);
        let (_, d1, d2) = self.profile(r);
        let xv = vec3(x);
        let u = xv / r;
        let q = 1.0 + self.tilt().dot(&xv);
        let uu = u * u.transpose();
        let hpsi = uu * d2 + (Mat3::identity() - uu) * (d1 / r);
        let gpsi = u * d1;
        let t = self.tilt();
        hpsi * q + gpsi * t.transpose() + t * gpsi.transpose()
    }

    fn radial_support(&self) -> Option<(f64, f64)> {
        Some((self.inner, self.outer))
    }
}

/// `v(x) = xᵀAx + b·x` with `A` symmetric and traceless (harmonic).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticHarmonic {
    pub a: Mat3,
    pub b: [f64; 3],
}

impl QuadraticHarmonic {
    pub fn new(a: Mat3, b: [f64; 3]) -> Result<Self, CarlemanError> {
        if (a - a.transpose()).amax() > 1e-14 || a.trace().abs() > 1e-14 * a.amax().max(1.0) {
            return Err(CarlemanError::InvalidArgument("harmonic quadratic needs symmetric traceless A".into()));
        }
        Ok(Self { a, b })
    }
}

impl TestFunction for QuadraticHarmonic {
    fn value(&self, x: &Point) -> f64 {
        let xv = vec3(x);
        xv.dot(&(self.a * xv)) + vec3(&self.b).dot(&xv)
    }
    fn gradient(&self, x: &Point) -> Vector3<f64> {
        self.a * vec3(x) * 2.0 + vec3(&self.b)
    }
    fn hessian(&self, _x: &Point) -> Mat3 {
        self.a * 2.0
    }
}

/// `𝓞 = {inner < |x| < outer} ⊂ B₁ ∖ {0}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShellDomain {
    pub inner: f64,
    pub outer: f64,
}

impl ShellDomain {
    pub fn new(inner: f64, outer: f64) -> Result<Self, CarlemanError> {
        if !(0.0 < inner && inner < outer && outer <= 1.0) {
            return Err(CarlemanError::InvalidArgument(format!("shell needs 0 < inner < outer ≤ 1 (got {inner}, {outer})")));
        }
        Ok(Self { inner, outer })
    }
}

/// Tensor-product rule: composite Gauss–Legendre in `r` times a sphere rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureSpec {
    pub radial_panels: usize,
    pub radial_order: usize,
    pub n_theta: usize,
    pub n_phi: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { radial_panels: 128, radial_order: 8, n_theta: 10, n_phi: 20 }
    }
}

impl QuadratureSpec {
    pub fn refined(&self) -> Self {
        Self { radial_panels: 2 * self.radial_panels, radial_order: self.radial_order, n_theta: 2 * self.n_theta, n_phi: 2 * self.n_phi }
    }
}

/// Pointwise `(|M|, ⟨Mx,x⟩/|x|², |div(Mx)| + |x|⁻²|∇(x·Mx)·Mx|, sup|⟨By,y⟩|/⟨My,y⟩)`.
fn hypothesis_values(m: &dyn TensorField, x: &Point, h: f64) -> Result<[f64; 4], CarlemanError> {
    let xv = vec3(x);
    let mm = m.eval(x);
    let dm = tensor_gradient(m, x, h);
    let mx = mm * xv;
    let mut jac = mm;
    for (j, d) in dm.iter().enumerate() {
        let col = d * xv;
        for k in 0..3 {
            jac[(k, j)] += col[k];
        }
    }
    let grad_q = jac.transpose() * xv + mx;
    let x2 = xv.norm_squared();
    let spectral = mm.symmetric_eigenvalues().amax();
    let c2 = claim2_ratio(&mm, &b_matrix(m, x, h))?;
    Ok([spectral, xv.dot(&mx) / x2, jac.trace().abs() + grad_q.dot(&mx).abs() / x2, c2])
}

/// The smallest `Λ` for which the three hypotheses of the weighted inequality
/// hold at a fixed grid of points of the shell.
pub fn hypothesis_constant(m: &dyn TensorField, domain: &ShellDomain, h: f64) -> Result<f64, CarlemanError> {
    let sphere = sphere_rule(6, 12);
    let mut need = 1.0f64;
    for k in 0..7 {
        let r = domain.inner + (domain.outer - domain.inner) * (k as f64 + 0.5) / 7.0;
        for (d, _) in &sphere {
            let x = [r * d[0], r * d[1], r * d[2]];
            let [spec, ell, c1, c2] = hypothesis_values(m, &x, h)?;
            if ell <= 0.0 {
                return Err(CarlemanError::NotElliptic { bound: f64::INFINITY, detail: format!("⟨Mx,x⟩ ≤ 0 at {x:?}") });
            }
            need = need.max(1.0 / ell).max(spec + c1).max(c2);
        }
    }
    Ok(need)
}

/// Both sides of the weighted inequality.
///
/// The three integrals are reported divided by the common factor
/// `e^{log_scale}` (the largest of them), which cancels in `measured_c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InequalityReport {
    pub p: f64,
    pub beta: f64,
    /// `∫ e^{2βr^{−p}} (p³β²r^{−2p−2}|v|² + ⟨M∇v,∇v⟩)`
    pub lhs: f64,
    /// `∫ r^{p+2} e^{2βr^{−p}} |div(M∇v)|² / (p|β|)`
    pub rhs_interior: f64,
    /// `∫_∂𝓞 e^{2βr^{−p}} (|∇v|² + p²β²r^{−2p−2}|v|²)`
    pub rhs_boundary: f64,
    /// `lhs / (rhs_interior + rhs_boundary)`
    pub measured_c: f64,
    pub log_scale: f64,
    /// Smallest `Λ` satisfying the hypotheses on the sample grid.
    pub hypothesis_lambda: f64,
    /// Largest relative change of `lhs` and of the right-hand side under refinement.
    pub refinement_change: f64,
}

/// Natural logarithms of the three integrals (`−∞` when an integral vanishes).
struct Sums {
    lhs: f64,
    rhs_i: f64,
    rhs_b: f64,
}

fn ln_or_neg_inf(v: f64) -> f64 {
    if v > 0.0 {
        v.ln()
    } else {
        f64::NEG_INFINITY
    }
}

fn log_sum(terms: impl Iterator<Item = f64>) -> f64 {
    let t: Vec<f64> = terms.collect();
    let m = t.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + t.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

fn log_add(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        m
    } else {
        m + ((a - m).exp() + (b - m).exp()).ln()
    }
}

// Integrals are accumulated as log-sum-exp over radial nodes, so neither the
// weight nor the test function underflows the comparison.
fn integrate(m: &dyn TensorField, v: &dyn TestFunction, w: &WeightParams, domain: &ShellDomain, q: &QuadratureSpec, h: f64) -> Sums {
    let (p, beta) = (w.p, w.beta);
    let (mut lo, mut hi) = (domain.inner, domain.outer);
    if let Some((a, b)) = v.radial_support() {
        lo = lo.max(a);
        hi = hi.min(b);
    }
    let sphere = sphere_rule(q.n_theta, q.n_phi);
    let (mut lhs, mut rhs_i) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    if hi > lo {
        let parts: Vec<(f64, f64, f64)> = composite_gauss_legendre(q.radial_order, q.radial_panels, lo, hi)
            .par_iter()
            .map(|&(r, wr)| {
                let (mut a, mut b) = (0.0, 0.0);
                for (d, ws) in &sphere {
                    let x = [r * d[0], r * d[1], r * d[2]];
                    let val = v.value(&x);
                    let g = v.gradient(&x);
                    let mm = m.eval(&x);
                    let dm = tensor_gradient(m, &x, h);
                    let mut div = (mm * v.hessian(&x)).trace();
                    for i in 0..3 {
                        div += (dm[i] * g)[i];
                    }
                    a += ws * (p.powi(3) * beta * beta * r.powf(-2.0 * p - 2.0) * val * val + g.dot(&(mm * g)));
                    b += ws * r.powf(p + 2.0) / (p * beta.abs()) * div * div;
                }
                (2.0 * w.exponent(r), wr * r * r * a, wr * r * r * b)
            })
            .collect();
        lhs = log_sum(parts.iter().map(|t| t.0 + ln_or_neg_inf(t.1)));
        rhs_i = log_sum(parts.iter().map(|t| t.0 + ln_or_neg_inf(t.2)));
    }
    let mut rhs_b = f64::NEG_INFINITY;
    for r in [domain.inner, domain.outer] {
        let mut acc = 0.0;
        for (d, ws) in &sphere {
            let x = [r * d[0], r * d[1], r * d[2]];
            let val = v.value(&x);
            let g = v.gradient(&x);
            acc += ws * r * r * (g.norm_squared() + p * p * beta * beta * r.powf(-2.0 * p - 2.0) * val * val);
        }
        rhs_b = log_add(rhs_b, ln_or_neg_inf(acc) + 2.0 * w.exponent(r));
    }
    Sums { lhs, rhs_i, rhs_b }
}

/// Relative change between two logarithms of positive quantities.
fn rel_change(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs().exp_m1()
    }
}

/// Measures both sides of the weighted inequality for `v` on the shell.
///
/// The hypotheses on `M` are sampled first and must hold with the declared
/// `Λ`. The integrals are computed with `quad` and with its refinement; a
/// relative change above 1% is reported as non-convergence.
pub fn carleman_inequality_check(
    m: &dyn TensorField,
    declared_lambda: f64,
    v: &dyn TestFunction,
    params: &WeightParams,
    domain: &ShellDomain,
    quad: &QuadratureSpec,
    h: f64,
) -> Result<InequalityReport, CarlemanError> {
    if params.beta.abs() < 1.0 {
        return Err(CarlemanError::InvalidArgument(format!("|β| = {} must be ≥ 1", params.beta.abs())));
    }
    let hypothesis_lambda = hypothesis_constant(m, domain, h)?;
    if hypothesis_lambda > declared_lambda {
        return Err(CarlemanError::HypothesisViolated { what: "weighted-inequality hypotheses".into(), needed: hypothesis_lambda, declared: declared_lambda });
    }
    let coarse = integrate(m, v, params, domain, quad, h);
    let fine = integrate(m, v, params, domain, &quad.refined(), h);
    let refinement_change = rel_change(coarse.lhs, fine.lhs).max(rel_change(log_add(coarse.rhs_i, coarse.rhs_b), log_add(fine.rhs_i, fine.rhs_b)));
    if refinement_change > 0.01 {
        return Err(CarlemanError::QuadratureNotConverged { quantity: "weighted integrals".into(), relative: refinement_change });
    }
    let den = log_add(fine.rhs_i, fine.rhs_b);
    let measured_c = if fine.lhs == f64::NEG_INFINITY {
        0.0
    } else if den == f64::NEG_INFINITY {
        f64::INFINITY
    } else {
        (fine.lhs - den).exp()
    };
    let shift = [fine.lhs, fine.rhs_i, fine.rhs_b].into_iter().fold(f64::NEG_INFINITY, f64::max);
    let shift = if shift.is_finite() { shift } else { 0.0 };
    Ok(InequalityReport {
        p: params.p,
        beta: params.beta,
        lhs: (fine.lhs - shift).exp(),
        rhs_interior: (fine.rhs_i - shift).exp(),
        rhs_boundary: (fine.rhs_b - shift).exp(),
        measured_c,
        log_scale: shift,
        hypothesis_lambda,
        refinement_change,
    })
}

/// Radii and exponents used to chain the estimate across folds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bookkeeping {
    pub n: f64,
    /// `τ_n = (1/n − Λ/n²)ⁿ`
    pub tau: f64,
    /// `s_n = (1/n + Λ/n²)ⁿ`
    pub s: f64,
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    /// `(R₁^{−p} − R₃^{−p}) / (R₂^{−p} − R₃^{−p})`; negative or infinite while `R₂ ≥ R₃`.
    pub rho: f64,
    /// `s_n / τ_n`
    pub ratio: f64,
}

/// `τ_n`, `s_n`, `R₁ = 1/n`, `R₂ = R₁ + 8Λ/n²`, `R₃ = 5/(4n)` and `ρ(n)`.
pub fn exponent_bookkeeping(lambda: f64, n: f64, p: f64) -> Result<Bookkeeping, CarlemanError> {
    if !(lambda >= 1.0) || !(n >= 10.0 * lambda) || !(p > 0.0) {
        return Err(CarlemanError::InvalidArgument(format!("bookkeeping needs Λ ≥ 1, n ≥ 10Λ, p > 0 (got {lambda}, {n}, {p})")));
    }
    let r1 = 1.0 / n;
    let r2 = r1 + 8.0 * lambda / (n * n);
    let r3 = 5.0 / (4.0 * n);
    // divide through by R₁^{−p}
    let a = (r1 / r2).powf(p);
    let b = (r1 / r3).powf(p);
    // R₂ = R₃ exactly when n = 32Λ; decide the tie before rounding does
    let rho = if n == 32.0 * lambda || a == b { f64::INFINITY } else { (1.0 - b) / (a - b) };
    let ln_tau = n * (1.0 / n - lambda / (n * n)).ln();
    let ln_s = n * (1.0 / n + lambda / (n * n)).ln();
    Ok(Bookkeeping { n, tau: ln_tau.exp(), s: ln_s.exp(), r1, r2, r3, rho, ratio: (ln_s - ln_tau).exp() })
}

/// `n₀ = min{n ∈ ℕ: n ≥ 10Λ, ρ(n) ≥ (1 + α)/2}` (searched up to `10⁷`).
pub fn n0(alpha: f64, lambda: f64, p: f64) -> Result<u64, CarlemanError> {
    if !(0.0 < alpha && alpha < 1.0) {
        return Err(CarlemanError::InvalidArgument(format!("α = {alpha} must lie in (0, 1)")));
    }
    let start = (10.0 * lambda).ceil().max(1.0) as u64;
    for n in start..10_000_000 {
        let b = exponent_bookkeeping(lambda, n as f64, p)?;
        if b.rho.is_finite() && b.rho >= 0.5 * (1.0 + alpha) {
            return Ok(n);
        }
    }
    Err(CarlemanError::InvalidArgument(format!("no n₀ below 10⁷ for α = {alpha}, Λ = {lambda}, p = {p}")))
}

#[cfg(test)]
mod tests {
    use super::super::{ConstantTensor, OscillatingMedium};
    use super::*;
    use approx::assert_relative_eq;

    fn aniso() -> OscillatingMedium {
        OscillatingMedium::new(Mat3::new(1.4, 0.2, -0.1, 0.2, 1.0, 0.15, -0.1, 0.15, 0.8), 0.1)
    }

    #[test]
    fn weight_identity_examples() {
        let id = ConstantTensor(Mat3::identity());
        let r = weight_derivative_identity(&WeightParams::new(1.0, 2.0).unwrap(), &id, &[1.0, 0.0, 0.0], 1e-4).unwrap();
        assert!(r.residual < 1e-5, "{r:?}");
        let r = weight_derivative_identity(&WeightParams::new(0.0, 2.0).unwrap(), &id, &[0.4, 0.2, 0.1], 1e-4).unwrap();
        assert_eq!((r.closed, r.numeric, r.residual), (0.0, 0.0, 0.0));
        let r = weight_derivative_identity(&WeightParams::new(2.0, 3.0).unwrap(), &aniso(), &[0.7, -0.4, 0.5], 1e-4).unwrap();
        assert!(r.residual < 1e-5, "{r:?}");
        // first-order behaviour in β
        let x = [0.6, 0.3, -0.5];
        let p = 4.0;
        let eps = 1e-7;
        let r = weight_derivative_identity(&WeightParams::new(eps, p).unwrap(), &aniso(), &x, 1e-4).unwrap();
        let m = aniso();
        let xv = vec3(&x);
        let rr = xv.norm();
        let dm = tensor_gradient(&m, &x, 1e-5);
        let div_mx = m.eval(&x).trace() + (0..3).map(|j| (dm[j] * xv)[j]).sum::<f64>();
        let slope = p * (-(p + 2.0) * rr.powf(-p - 4.0) * xv.dot(&(m.eval(&x) * xv)) + rr.powf(-p - 2.0) * div_mx);
        assert_relative_eq!(r.closed / eps, slope, max_relative = 1e-5);
    }

    #[test]
    fn bump_derivatives_match_differences() {
        let v = RadialBump { inner: 0.5, outer: 0.95, tilt: [0.3, -0.2, 0.4] };
        let x = [0.4, 0.3, 0.5];
        let h = 1e-5;
        let g = v.gradient(&x);
        let hs = v.hessian(&x);
        for k in 0..3 {
            let mut a = x;
            let mut b = x;
            a[k] += h;
            b[k] -= h;
            assert_relative_eq!((v.value(&a) - v.value(&b)) / (2.0 * h), g[k], max_relative = 1e-7, epsilon = 1e-12);
            let dg = (v.gradient(&a) - v.gradient(&b)) / (2.0 * h);
            for l in 0..3 {
                assert_relative_eq!(dg[l], hs[(l, k)], max_relative = 1e-6, epsilon = 1e-9);
            }
        }
        assert_eq!(v.value(&[0.1, 0.0, 0.0]), 0.0);
    }

    #[test]
    fn zero_function_gives_zero_sides() {
        let id = ConstantTensor(Mat3::identity());
        let zero = QuadraticHarmonic::new(Mat3::zeros(), [0.0; 3]).unwrap();
        let r = carleman_inequality_check(
            &id,
            6.0,
            &zero,
            &WeightParams::new(-8.0, 4.0).unwrap(),
            &ShellDomain::new(0.5, 1.0).unwrap(),
            &QuadratureSpec { radial_panels: 8, ..Default::default() },
            1e-5,
        )
        .unwrap();
        assert_eq!((r.lhs, r.rhs_interior, r.rhs_boundary, r.measured_c), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn bump_has_no_boundary_term() {
        let id = ConstantTensor(Mat3::identity());
        let v = RadialBump { inner: 0.55, outer: 0.95, tilt: [0.3, 0.0, -0.2] };
        let r = carleman_inequality_check(
            &id,
            6.0,
            &v,
            &WeightParams::new(-8.0, 4.0).unwrap(),
            &ShellDomain::new(0.5, 1.0).unwrap(),
            &QuadratureSpec::default(),
            1e-5,
        )
        .unwrap();
        assert_eq!(r.rhs_boundary, 0.0);
        assert!(r.measured_c.is_finite() && r.measured_c > 0.0, "{r:?}");
        assert_relative_eq!(r.hypothesis_lambda, 6.0, max_relative = 1e-9);
    }

    #[test]
    fn harmonic_function_is_controlled_by_boundary() {
        let id = ConstantTensor(Mat3::identity());
        let a = Mat3::new(0.0, 1.0, 0.0, 1.0, 0.5, 0.0, 0.0, 0.0, -0.5);
        let v = QuadraticHarmonic::new(a, [0.2, 0.0, 0.1]).unwrap();
        let r = carleman_inequality_check(
            &id,
            6.0,
            &v,
            &WeightParams::new(-8.0, 4.0).unwrap(),
            &ShellDomain::new(0.5, 1.0).unwrap(),
            &QuadratureSpec { radial_panels: 32, ..Default::default() },
            1e-5,
        )
        .unwrap();
        assert!(r.rhs_interior < 1e-20 * r.rhs_boundary, "{r:?}");
        assert!(r.measured_c.is_finite() && r.measured_c > 0.0);
    }

    #[test]
    fn hypotheses_are_enforced() {
        let id = ConstantTensor(Mat3::identity());
        let v = RadialBump { inner: 0.55, outer: 0.95, tilt: [0.0; 3] };
        let e = carleman_inequality_check(
            &id,
            3.0,
            &v,
            &WeightParams::new(-8.0, 4.0).unwrap(),
            &ShellDomain::new(0.5, 1.0).unwrap(),
            &QuadratureSpec::default(),
            1e-5,
        );
        assert!(matches!(e, Err(CarlemanError::HypothesisViolated { .. })));
    }

    #[test]
    fn bookkeeping_values() {
        let b = exponent_bookkeeping(1.0, 100.0, 8.0).unwrap();
        assert!((b.ratio / std::f64::consts::E.powi(2) - 1.0).abs() < 0.05);
        assert_relative_eq!(b.r2 - b.r1, 8.0 / 1e4, max_relative = 1e-12);
        assert!(exponent_bookkeeping(1.0, 5.0, 8.0).is_err());
        // ρ decreases to one once R₂ < R₃
        let mut prev = f64::INFINITY;
        for n in (40..4000).step_by(40) {
            let r = exponent_bookkeeping(1.0, n as f64, 8.0).unwrap().rho;
            assert!(r > 1.0 && r < prev, "n={n} ρ={r}");
            prev = r;
        }
        assert!(prev < 1.1);
        assert_eq!(n0(0.5, 1.0, 8.0).unwrap(), 33);
        assert_eq!(n0(0.9, 2.0, 16.0).unwrap(), 65);
    }
}
