//! Conformal folding maps, the Carleman weight `e^{βr^{-p}}` and numerical
//! checks of the structural claims that make the weighted estimate uniform in
//! the fold parameter.
//!
//! Everything is three-dimensional. Points are written `x = (x₁, x₂, x̃)` with
//! `(r̂, θ)` the polar coordinates of `(x₁, x₂)`.

mod claims;
mod frame;
mod inequality;

pub use claims::{b_matrix, bform, claim2_ratio, pushed_matrix, verify_structural_claims, ClaimReport, OscillatingMedium};
pub use frame::{build_frame, flattening_map, fold_map, kn_matrix, ConformalFrame, FoldValue, FrameResiduals, KnMatrix};
pub use inequality::{
    carleman_inequality_check, exponent_bookkeeping, hypothesis_constant, n0, weight_derivative_identity, Bookkeeping,
    InequalityReport, QuadraticHarmonic, QuadratureSpec, RadialBump, ShellDomain, TestFunction, WeightIdentity,
};

use crate::media::{Mat3, MediaError, Point};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CarlemanError {
    #[error("point {0:?} lies on the fold axis r̂ = 0")]
    AxisSingularity(Point),
    #[error("point outside the domain: {0}")]
    OutsideDomain(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("matrix is not symmetric positive definite with eigenvalues in [1/{bound}, {bound}]: {detail}")]
    NotElliptic { bound: f64, detail: String },
    #[error("hypothesis `{what}` needs Λ ≥ {needed}, declared {declared}")]
    HypothesisViolated { what: String, needed: f64, declared: f64 },
    #[error("quadrature refinement changed {quantity} by {relative:.3e} (limit 1%)")]
    QuadratureNotConverged { quantity: String, relative: f64 },
    #[error(transparent)]
    Media(#[from] MediaError),
}

/// A real symmetric matrix field `x ↦ M(x)`.
///
/// `gradient` is an optional analytic hook returning `[∂₁M, ∂₂M, ∂₃M]`;
/// without it derivatives are central differences.
pub trait TensorField: Sync {
    fn eval(&self, x: &Point) -> Mat3;
    fn gradient(&self, _x: &Point) -> Option<[Mat3; 3]> {
        None
    }
}

impl<F: Fn(&Point) -> Mat3 + Sync> TensorField for F {
    fn eval(&self, x: &Point) -> Mat3 {
        self(x)
    }
}

/// `M(x) ≡ M₀`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantTensor(pub Mat3);

impl TensorField for ConstantTensor {
    fn eval(&self, _x: &Point) -> Mat3 {
        self.0
    }
    fn gradient(&self, _x: &Point) -> Option<[Mat3; 3]> {
        Some([Mat3::zeros(); 3])
    }
}

/// `[∂₁M, ∂₂M, ∂₃M]` at `x`, from the hook or by central differences of step `h`.
pub fn tensor_gradient(m: &dyn TensorField, x: &Point, h: f64) -> [Mat3; 3] {
    if let Some(g) = m.gradient(x) {
        return g;
    }
    std::array::from_fn(|k| {
        let mut xp = *x;
        let mut xm = *x;
        xp[k] += h;
        xm[k] -= h;
        (m.eval(&xp) - m.eval(&xm)) / (2.0 * h)
    })
}

/// `Y_{γ₁,γ₂,R} = {θ ∈ (−π/2, π/2), γ₁R < r̂ < γ₂R, |x̃| < R}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorDomain {
    pub gamma1: f64,
    pub gamma2: f64,
    pub radius: f64,
}

impl SectorDomain {
    pub fn new(gamma1: f64, gamma2: f64, radius: f64) -> Result<Self, CarlemanError> {
        if !(0.0 < gamma1 && gamma1 < gamma2 && gamma2 < 1.0) || !(radius > 0.0) {
            return Err(CarlemanError::InvalidArgument(format!(
                "sector needs 0 < γ₁ < γ₂ < 1 and R > 0 (got {gamma1}, {gamma2}, {radius})"
            )));
        }
        Ok(Self { gamma1, gamma2, radius })
    }

    pub fn contains(&self, x: &Point) -> bool {
        let (rh, th) = polar(x);
        x[0] > 0.0 && th.abs() < std::f64::consts::FRAC_PI_2 && self.gamma1 * self.radius < rh && rh < self.gamma2 * self.radius && x[2].abs() < self.radius
    }
}

/// Weight parameters of `e^{βr^{-p}}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightParams {
    pub beta: f64,
    pub p: f64,
}

impl WeightParams {
    pub fn new(beta: f64, p: f64) -> Result<Self, CarlemanError> {
        if !(p >= 1.0) || !beta.is_finite() {
            return Err(CarlemanError::InvalidArgument(format!("weight needs p ≥ 1 and finite β (got p = {p}, β = {beta})")));
        }
        Ok(Self { beta, p })
    }

    /// The exponent `β r^{-p}` of the weight.
    pub fn exponent(&self, r: f64) -> f64 {
        self.beta * r.powf(-self.p)
    }
}

/// `(r̂, θ)` of `(x₁, x₂)`.
pub fn polar(x: &Point) -> (f64, f64) {
    (x[0].hypot(x[1]), x[1].atan2(x[0]))
}

/// `[[cos a, sin a], [−sin a, cos a]]` in the `(x₁, x₂)` block, `corner` in the last slot.
pub(crate) fn block_rotation(a: f64, corner: f64) -> Mat3 {
    let (s, c) = a.sin_cos();
    Mat3::new(c, s, 0.0, -s, c, 0.0, 0.0, 0.0, corner)
}
