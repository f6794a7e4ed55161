//! Vector spherical harmonics `Y x̂`, `U = ∇_S Y / sqrt(n(n+1))`, `V = x̂ × U`.
//!
//! Complex harmonics with the Condon–Shortley phase, orthonormal in
//! `L^2(∂B_1)`. Associated Legendre functions are carried in the reduced form
//! `P̄_n^m / sin^m θ`, so nothing is ever divided by `sin θ` and the poles need
//! no special casing.

use super::SpecfunError;
use num_complex::Complex64;
use std::f64::consts::PI;

pub type CVec3 = [Complex64; 3];

/// The three members of the basis at one direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VshTriple {
    /// `Y_n^m(x̂) x̂`
    pub radial: CVec3,
    /// `U_n^m(x̂)`
    pub gradient_tangent: CVec3,
    /// `V_n^m(x̂) = x̂ × U_n^m(x̂)`
    pub rotated_tangent: CVec3,
    /// The scalar `Y_n^m(x̂)`.
    pub y: Complex64,
}

/// Normalised `P̄_n^m(cos θ)` (CS phase, `m >= 0`) together with
/// `m P̄/sin θ` and `dP̄/dθ`, all evaluated without dividing by `sin θ`.
#[derive(Debug, Clone, Copy)]
pub struct LegendreTriple {
    pub p: f64,
    pub m_over_sin: f64,
    pub d_theta: f64,
}

pub fn legendre_normalized(n: usize, m: usize, cos_t: f64, sin_t: f64) -> LegendreTriple {
    assert!(m <= n);
    // reduced q = P̄/sin^m, polynomial in x = cos θ
    let x = cos_t;
    let mut q_mm = (1.0 / (4.0 * PI)).sqrt();
    for k in 1..=m {
        q_mm *= -((2 * k + 1) as f64 / (2 * k) as f64).sqrt();
    }
    let (mut q_prev, mut dq_prev) = (0.0, 0.0);
    let (mut q, mut dq) = (q_mm, 0.0);
    for l in (m + 1)..=n {
        let lf = l as f64;
        let mf = m as f64;
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
        let b = if l >= m + 2 {
            (((lf - 1.0) * (lf - 1.0) - mf * mf) * (2.0 * lf + 1.0) / ((lf * lf - mf * mf) * (2.0 * lf - 3.0))).sqrt()
        } else {
            0.0
        };
        let q_new = a * x * q - b * q_prev;
        let dq_new = a * (q + x * dq) - b * dq_prev;
        q_prev = q;
        dq_prev = dq;
        q = q_new;
        dq = dq_new;
    }
    let sm = sin_t.powi(m as i32);
    let sm1 = if m >= 1 { sin_t.powi(m as i32 - 1) } else { 0.0 };
    let p = sm * q;
    let m_over_sin = m as f64 * sm1 * q;
    let d_theta = m as f64 * sm1 * cos_t * q - sm * sin_t * dq;
    LegendreTriple { p, m_over_sin, d_theta }
}

fn cross(a: &CVec3, b: &[f64; 3]) -> CVec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Scalar harmonic `Y_n^m` only.
pub fn ylm(n: usize, m: i64, dir: &[f64; 3]) -> Result<Complex64, SpecfunError> {
    Ok(vsh_any(n, m, dir)?.y)
}

/// Evaluates the triple at a unit direction (`n >= 1`, `|m| <= n`).
pub fn vsh(n: usize, m: i64, dir: &[f64; 3]) -> Result<VshTriple, SpecfunError> {
    if n == 0 {
        return Err(SpecfunError::InvalidArgument("vector harmonics need n >= 1".into()));
    }
    vsh_any(n, m, dir)
}

fn vsh_any(n: usize, m: i64, dir: &[f64; 3]) -> Result<VshTriple, SpecfunError> {
    if m.unsigned_abs() as usize > n {
        return Err(SpecfunError::InvalidArgument(format!("|m| = {} exceeds n = {n}", m.abs())));
    }
    let norm = (dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]).sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(SpecfunError::InvalidArgument(format!("direction not unit (|x| = {norm})")));
    }
    let ma = m.unsigned_abs() as usize;
    let rho = (dir[0] * dir[0] + dir[1] * dir[1]).sqrt();
    let cos_t = dir[2];
    let sin_t = rho;
    let phi = if rho > 0.0 { dir[1].atan2(dir[0]) } else { 0.0 };
    let (sp, cp) = phi.sin_cos();
    let lt = legendre_normalized(n, ma, cos_t, sin_t);
    let e = Complex64::from_polar(1.0, ma as f64 * phi);
    let i = Complex64::new(0.0, 1.0);
    let y = e * lt.p;
    let g_theta = e * lt.d_theta;
    let g_phi = i * e * lt.m_over_sin;
    let theta_hat = [cos_t * cp, cos_t * sp, -sin_t];
    let phi_hat = [-sp, cp, 0.0];
    let lam = ((n * (n + 1)) as f64).sqrt();
    let mut u = [Complex64::new(0.0, 0.0); 3];
    for k in 0..3 {
        u[k] = (g_theta * theta_hat[k] + g_phi * phi_hat[k]) / lam;
    }
    let mut y_out = y;
    if m < 0 {
        // Y_n^{-m} = (-1)^m conj(Y_n^m), and the same for its surface gradient
        let s = if ma.is_multiple_of(2) { 1.0 } else { -1.0 };
        y_out = y.conj() * s;
        for c in u.iter_mut() {
            *c = c.conj() * s;
        }
    }
    // V = x̂ × U  =  -(U × x̂)
    let uxd = cross(&u, dir);
    let v = [-uxd[0], -uxd[1], -uxd[2]];
    let radial = [y_out * dir[0], y_out * dir[1], y_out * dir[2]];
    Ok(VshTriple { radial, gradient_tangent: u, rotated_tangent: v, y: y_out })
}

/// Hermitian inner product `sum a_k conj(b_k)`.
pub fn cdot(a: &CVec3, b: &CVec3) -> Complex64 {
    a[0] * b[0].conj() + a[1] * b[1].conj() + a[2] * b[2].conj()
}
