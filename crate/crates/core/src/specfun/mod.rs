//! Special functions: spherical Bessel/Hankel functions of complex argument,
//! normalised Bessel functions, vector spherical harmonics and the
//! integer-order cylinder functions used by the planar demos.

pub mod bessel;
pub mod scaled;
pub mod vsh;

pub use bessel::{
    derivative_array, ln_double_factorial, normalized_bessel, normalized_bessel_scaled, spherical_bessel,
    spherical_bessel_scaled, spherical_bessel_with_derivative, sph_h1_array, sph_j_array, sph_y_array,
    wronskian_residual, BesselKind, NormalizedKind, MAX_ORDER,
};
pub use scaled::Scaled;
pub use vsh::{cdot, legendre_normalized, vsh, ylm, CVec3, VshTriple};

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecfunError {
    #[error("order {n} exceeds the supported maximum {max}")]
    OrderOutOfRange { n: usize, max: usize },
    #[error("argument must be nonzero")]
    ZeroArgument,
    #[error("value {mantissa} x 10^{exponent} is outside the f64 range")]
    Overflow { mantissa: Complex64, exponent: i64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Integer-order Bessel function of the first kind `J_k(x)`, `x >= 0`.
pub fn cyl_j(k: i64, x: f64) -> f64 {
    let v = puruspe::Jn(k.unsigned_abs() as u32, x);
    if k < 0 && k % 2 != 0 {
        -v
    } else {
        v
    }
}

/// Integer-order Bessel function of the second kind `Y_k(x)`, `x > 0`.
pub fn cyl_y(k: i64, x: f64) -> f64 {
    let v = puruspe::Yn(k.unsigned_abs() as u32, x);
    if k < 0 && k % 2 != 0 {
        -v
    } else {
        v
    }
}

/// `d/dx J_k(x) = (J_{k-1} - J_{k+1})/2`.
pub fn cyl_j_prime(k: i64, x: f64) -> f64 {
    0.5 * (cyl_j(k - 1, x) - cyl_j(k + 1, x))
}

/// `d/dx Y_k(x) = (Y_{k-1} - Y_{k+1})/2`.
pub fn cyl_y_prime(k: i64, x: f64) -> f64 {
    0.5 * (cyl_y(k - 1, x) - cyl_y(k + 1, x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cylinder_wronskian() {
        // J_k Y_k' - J_k' Y_k = 2/(pi x)
        for k in 0..6 {
            for &x in &[0.5, 1.7, 6.0] {
                let w = cyl_j(k, x) * cyl_y_prime(k, x) - cyl_j_prime(k, x) * cyl_y(k, x);
                assert!((w - 2.0 / (std::f64::consts::PI * x)).abs() < 1e-10, "k={k} x={x} w={w}");
            }
        }
    }
}
