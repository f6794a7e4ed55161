//! Spherical Bessel, Neumann and Hankel functions of complex argument.
//!
//! Stability strategy:
//! - `j_n`: backward ratio recurrence (Miller) normalised by whichever of
//!   `j_0`, `j_1` is larger in modulus;
//! - `y_n` and `h_n^{(1)}`: forward recurrence, which is the dominant
//!   direction for both (Hankel keeps `e^{iz}` factored out so the lossy
//!   branch does not cancel);
//! - everything runs on [`Scaled`] and `e^{|Im z|}` is folded into the exponent.

use super::scaled::Scaled;
use super::SpecfunError;
use num_complex::Complex64;

/// Largest order accepted by the recurrences.
pub const MAX_ORDER: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BesselKind {
    J,
    Y,
    H1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalizedKind {
    Jhat,
    Yhat,
}

fn check_order(n: usize) -> Result<(), SpecfunError> {
    if n > MAX_ORDER {
        return Err(SpecfunError::OrderOutOfRange { n, max: MAX_ORDER });
    }
    Ok(())
}

/// `(sin z, cos z)` with the `e^{|Im z|}` growth moved into the exponent.
pub fn scaled_sin_cos(z: Complex64) -> (Scaled, Scaled) {
    let a = z.im.abs();
    let sg = z.im.signum();
    let q = (-2.0 * a).exp();
    let (sx, cx) = z.re.sin_cos();
    let ch = 0.5 * (1.0 + q);
    let sh = 0.5 * (1.0 - q) * if z.im == 0.0 { 0.0 } else { sg };
    let s = Complex64::new(sx * ch, cx * sh);
    let c = Complex64::new(cx * ch, -sx * sh);
    (Scaled::from_c64_ln(s, a), Scaled::from_c64_ln(c, a))
}

/// `e^{iz}` as a scaled number.
pub fn scaled_exp_i(z: Complex64) -> Scaled {
    Scaled::from_c64_ln(Complex64::from_polar(1.0, z.re), -z.im)
}

fn start_order(nmax: usize, z: Complex64) -> usize {
    let a = z.norm();
    nmax.max(a.ceil() as usize) + 30 + (6.0 * a.cbrt()).ceil() as usize
}

/// `j_0..=j_nmax` at `z`.
pub fn sph_j_array(nmax: usize, z: Complex64) -> Result<Vec<Scaled>, SpecfunError> {
    check_order(nmax)?;
    let mut out = vec![Scaled::ZERO; nmax + 1];
    if z.norm() == 0.0 {
        out[0] = Scaled::ONE;
        return Ok(out);
    }
    let top = start_order(nmax.max(1), z);
    // ratios r_k = j_k / j_{k-1}
    let mut ratios = vec![Complex64::new(0.0, 0.0); nmax.max(1) + 1];
    let mut r = Complex64::new(0.0, 0.0);
    for k in (1..=top).rev() {
        let mut d = Complex64::new((2 * k + 1) as f64, 0.0) / z - r;
        if d.norm() == 0.0 {
            d = Complex64::new(1e-300, 0.0);
        }
        r = d.inv();
        if k <= nmax.max(1) {
            ratios[k] = r;
        }
    }
    let (s, c) = scaled_sin_cos(z);
    let zs = Scaled::from_c64(z);
    let j0 = s / zs;
    let j1 = s / (zs * zs) - c / zs;
    if j0.ln_abs() >= j1.ln_abs() {
        let mut cur = j0;
        out[0] = cur;
        for k in 1..=nmax {
            cur = cur * Scaled::from_c64(ratios[k]);
            out[k] = cur;
        }
    } else {
        out[0] = j1 / Scaled::from_c64(ratios[1]);
        if nmax >= 1 {
            let mut cur = j1;
            out[1] = cur;
            for k in 2..=nmax {
                cur = cur * Scaled::from_c64(ratios[k]);
                out[k] = cur;
            }
        }
    }
    Ok(out)
}

/// `y_0..=y_nmax` at `z != 0`.
pub fn sph_y_array(nmax: usize, z: Complex64) -> Result<Vec<Scaled>, SpecfunError> {
    check_order(nmax)?;
    if z.norm() == 0.0 {
        return Err(SpecfunError::ZeroArgument);
    }
    let (s, c) = scaled_sin_cos(z);
    let zs = Scaled::from_c64(z);
    let y0 = -(c / zs);
    let y1 = -(c / (zs * zs)) - s / zs;
    Ok(forward(nmax, z, y0, y1))
}

/// `h^{(1)}_0..=h^{(1)}_nmax` at `z != 0`.
pub fn sph_h1_array(nmax: usize, z: Complex64) -> Result<Vec<Scaled>, SpecfunError> {
    check_order(nmax)?;
    if z.norm() == 0.0 {
        return Err(SpecfunError::ZeroArgument);
    }
    let e = scaled_exp_i(z);
    let zs = Scaled::from_c64(z);
    let i = Complex64::new(0.0, 1.0);
    let h0 = (e / zs) * (-i);
    let h1 = -(e * Scaled::from_c64(z + i) / (zs * zs));
    Ok(forward(nmax, z, h0, h1))
}

fn forward(nmax: usize, z: Complex64, f0: Scaled, f1: Scaled) -> Vec<Scaled> {
    let mut out = Vec::with_capacity(nmax + 1);
    out.push(f0);
    if nmax >= 1 {
        out.push(f1);
    }
    let zi = z.inv();
    for k in 1..nmax {
        let next = out[k] * (zi * (2 * k + 1) as f64) - out[k - 1];
        out.push(next);
    }
    out
}

/// Derivatives `f_n'` for `n < f.len()` from `f_n' = f_{n-1} - (n+1)/z f_n`, `f_0' = -f_1`.
/// The last entry needs `f_{len}` only for `n = 0`, so `f` must hold at least two orders.
pub fn derivative_array(f: &[Scaled], z: Complex64) -> Vec<Scaled> {
    let zi = z.inv();
    (0..f.len())
        .map(|n| {
            if n == 0 {
                -f[1]
            } else {
                f[n - 1] - f[n] * (zi * (n + 1) as f64)
            }
        })
        .collect()
}

fn array(kind: BesselKind, nmax: usize, z: Complex64) -> Result<Vec<Scaled>, SpecfunError> {
    match kind {
        BesselKind::J => sph_j_array(nmax, z),
        BesselKind::Y => sph_y_array(nmax, z),
        BesselKind::H1 => sph_h1_array(nmax, z),
    }
}

/// `f_n(z)` in scaled form; never overflows.
pub fn spherical_bessel_scaled(kind: BesselKind, n: usize, z: Complex64) -> Result<Scaled, SpecfunError> {
    Ok(array(kind, n, z)?[n])
}

/// `f_n(z)`; values outside the `f64` range come back as [`SpecfunError::Overflow`]
/// carrying the (mantissa, decimal exponent) pair.
pub fn spherical_bessel(kind: BesselKind, n: usize, z: Complex64) -> Result<Complex64, SpecfunError> {
    let v = spherical_bessel_scaled(kind, n, z)?;
    if v.e > 307 {
        return Err(SpecfunError::Overflow { mantissa: v.m, exponent: v.e });
    }
    Ok(v.to_c64())
}

/// `(f_n(z), f_n'(z))`.
pub fn spherical_bessel_with_derivative(
    kind: BesselKind,
    n: usize,
    z: Complex64,
) -> Result<(Scaled, Scaled), SpecfunError> {
    let f = array(kind, n.max(1), z)?;
    let d = derivative_array(&f, z);
    Ok((f[n], d[n]))
}

/// `ln(k!!)` for odd `k >= -1`, with `(-1)!! = 1`.
pub fn ln_double_factorial(k: i64) -> f64 {
    let mut s = 0.0;
    let mut j = k;
    while j > 1 {
        s += (j as f64).ln();
        j -= 2;
    }
    s
}

/// `ĵ_n(r) = (2n+1)!! j_n(r)` or `ŷ_n(r) = -y_n(r)/(2n-1)!!`, scaled.
pub fn normalized_bessel_scaled(kind: NormalizedKind, n: usize, r: f64) -> Result<Scaled, SpecfunError> {
    if !(r > 0.0) {
        return Err(SpecfunError::InvalidArgument(format!("r must be positive, got {r}")));
    }
    let z = Complex64::new(r, 0.0);
    Ok(match kind {
        NormalizedKind::Jhat => {
            let j = spherical_bessel_scaled(BesselKind::J, n, z)?;
            j * Scaled::from_c64_ln(Complex64::new(1.0, 0.0), ln_double_factorial(2 * n as i64 + 1))
        }
        NormalizedKind::Yhat => {
            let y = spherical_bessel_scaled(BesselKind::Y, n, z)?;
            -(y * Scaled::from_c64_ln(Complex64::new(1.0, 0.0), -ln_double_factorial(2 * n as i64 - 1)))
        }
    })
}

/// Real value of the normalised function; errors if it leaves the `f64` range.
pub fn normalized_bessel(kind: NormalizedKind, n: usize, r: f64) -> Result<f64, SpecfunError> {
    let v = normalized_bessel_scaled(kind, n, r)?;
    if v.e > 307 {
        return Err(SpecfunError::Overflow { mantissa: v.m, exponent: v.e });
    }
    Ok(v.to_c64().re)
}

/// `|j_n y_n' - j_n' y_n - 1/r^2|` with recurrence derivatives.
pub fn wronskian_residual(n: usize, r: f64) -> Result<f64, SpecfunError> {
    if !(r > 0.0) {
        return Err(SpecfunError::InvalidArgument(format!("r must be positive, got {r}")));
    }
    let z = Complex64::new(r, 0.0);
    let (j, jp) = spherical_bessel_with_derivative(BesselKind::J, n, z)?;
    let (y, yp) = spherical_bessel_with_derivative(BesselKind::Y, n, z)?;
    let w = j * yp - jp * y - Scaled::from_f64(1.0 / (r * r));
    Ok(w.to_c64().norm())
}
