//! Boundary norms on spheres and three-sphere inequalities.
//!
//! Full-data inequalities are checked exactly through modal expansions;
//! partial-data statements only assert that constants exist, so here they are
//! measured ([`empirical_alpha`]) rather than asserted.

mod helmholtz;
mod maxwell;
mod planar;

pub use helmholtz::{
    check_helmholtz_3sphere, empirical_alpha, helmholtz_constant, hnorm_circle, hnorm_sphere, hnorm_sphere_with_tensor, partial_data_norm, AlphaReport,
    AlphaRow, CircleCurve, Dim, HNorm, HelmholtzExpansion, HelmholtzTerm, PartialBoundary, ThreeSphereCheck,
};
pub use maxwell::{
    check_maxwell_3sphere, hminushalf_div_norm, maxwell_constant, random_maxwell_field, single_mode_trace_ratio, MaxwellModalField, MaxwellTerm, TraceNorm,
};
pub use planar::{check_hadamard, random_holomorphic, sup_norm_circle, HadamardCheck, HarmonicExpansion2D};

use crate::specfun::SpecfunError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ThreeSphereError {
    #[error("radii must satisfy 0 < R1 < R2 < R3, got ({0}, {1}, {2})")]
    DegenerateRadii(f64, f64, f64),
    #[error("excision of width {r0} covers the whole sphere of radius {radius}")]
    EmptyBoundary { r0: f64, radius: f64 },
    #[error("family of {size} members is too small for a regression (need at least {min})")]
    FamilyTooSmall { size: usize, min: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Special(#[from] SpecfunError),
}

/// `α = ln(R₃/R₂) / ln(R₃/R₁)`.
pub fn interpolation_exponent(r1: f64, r2: f64, r3: f64) -> Result<f64, ThreeSphereError> {
    if !(0.0 < r1 && r1 < r2 && r2 < r3) || !r3.is_finite() {
        return Err(ThreeSphereError::DegenerateRadii(r1, r2, r3));
    }
    Ok((r3 / r2).ln() / (r3 / r1).ln())
}

/// `a^α b^{1−α}` evaluated in log space.
pub(crate) fn interpolate(a: f64, b: f64, alpha: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        return 0.0;
    }
    (alpha * a.ln() + (1.0 - alpha) * b.ln()).exp()
}

/// `lhs / rhs`, with `0/0 = 0`.
pub(crate) fn ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 {
        0.0
    } else {
        lhs / rhs
    }
}
