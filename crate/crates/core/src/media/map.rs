//! Diffeomorphisms with analytic Jacobians and the push-forward operations.

use super::{CMat3, MediaError, Point};
use crate::specfun::CVec3;
use nalgebra::Matrix3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub type Mat3 = Matrix3<f64>;

/// A smooth change of variables `x ↦ T(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SmoothMap {
    Identity,
    /// `x ↦ R² x / |x|²`
    Kelvin { radius: f64 },
    /// `x ↦ r^p x / |x|^p`
    Power { radius: f64, p: f64 },
    /// `x ↦ H x`
    Linear { matrix: [[f64; 3]; 3] },
    /// `(r̂, θ, x̃) ↦ (r̂^{1/n}, θ/n, x̃)` in polar coordinates of `(x₁, x₂)`.
    Fold { n: f64 },
    /// `second ∘ first`
    Compose { first: Box<SmoothMap>, second: Box<SmoothMap> },
}

fn norm(x: &Point) -> f64 {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

fn scale(x: &Point, s: f64) -> Point {
    [x[0] * s, x[1] * s, x[2] * s]
}

fn to_vec(x: &Point) -> nalgebra::Vector3<f64> {
    nalgebra::Vector3::new(x[0], x[1], x[2])
}

impl SmoothMap {
    pub fn kelvin(radius: f64) -> Result<Self, MediaError> {
        if !(radius > 0.0) {
            return Err(MediaError::InvalidParameter(format!("kelvin radius {radius} must be positive")));
        }
        Ok(SmoothMap::Kelvin { radius })
    }

    pub fn power(radius: f64, p: f64) -> Result<Self, MediaError> {
        if !(radius > 0.0) || !(p > 1.0) {
            return Err(MediaError::InvalidParameter(format!("power map needs radius > 0 and p > 1 (got {radius}, {p})")));
        }
        Ok(SmoothMap::Power { radius, p })
    }

    pub fn linear(m: Mat3) -> Result<Self, MediaError> {
        if m.determinant().abs() < 1e-300 {
            return Err(MediaError::SingularJacobian);
        }
        let mut matrix = [[0.0; 3]; 3];
        for (i, row) in matrix.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = m[(i, j)];
            }
        }
        Ok(SmoothMap::Linear { matrix })
    }

    pub fn fold(n: f64) -> Result<Self, MediaError> {
        if !(n >= 1.0) {
            return Err(MediaError::InvalidParameter(format!("fold parameter {n} must be >= 1")));
        }
        Ok(SmoothMap::Fold { n })
    }

    /// `second ∘ first`.
    pub fn then(self, second: SmoothMap) -> SmoothMap {
        SmoothMap::Compose { first: Box::new(self), second: Box::new(second) }
    }

    pub fn label(&self) -> String {
        match self {
            SmoothMap::Identity => "identity".into(),
            SmoothMap::Kelvin { radius } => format!("kelvin({radius})"),
            SmoothMap::Power { radius, p } => format!("power({radius},{p})"),
            SmoothMap::Linear { .. } => "linear".into(),
            SmoothMap::Fold { n } => format!("ln_fold({n})"),
            SmoothMap::Compose { first, second } => format!("{}∘{}", second.label(), first.label()),
        }
    }

    fn matrix(m: &[[f64; 3]; 3]) -> Mat3 {
        Mat3::from_fn(|i, j| m[i][j])
    }

    fn power_exponent(&self) -> Option<(f64, f64)> {
        match *self {
            SmoothMap::Kelvin { radius } => Some((radius, 2.0)),
            SmoothMap::Power { radius, p } => Some((radius, p)),
            _ => None,
        }
    }

    pub fn apply(&self, x: &Point) -> Result<Point, MediaError> {
        if let Some((r0, p)) = self.power_exponent() {
            let r = norm(x);
            if r == 0.0 {
                return Err(MediaError::AtOrigin);
            }
            return Ok(scale(x, r0.powf(p) / r.powf(p)));
        }
        match self {
            SmoothMap::Identity => Ok(*x),
            SmoothMap::Linear { matrix } => {
                let y = Self::matrix(matrix) * to_vec(x);
                Ok([y[0], y[1], y[2]])
            }
            SmoothMap::Fold { n } => {
                let rh = x[0].hypot(x[1]);
                if rh == 0.0 {
                    return Ok([0.0, 0.0, x[2]]);
                }
                let th = x[1].atan2(x[0]);
                let s = rh.powf(1.0 / n);
                Ok([s * (th / n).cos(), s * (th / n).sin(), x[2]])
            }
            SmoothMap::Compose { first, second } => second.apply(&first.apply(x)?),
            _ => unreachable!(),
        }
    }

    pub fn inverse(&self, y: &Point) -> Result<Point, MediaError> {
        if let Some((r0, p)) = self.power_exponent() {
            let s = norm(y);
            if s == 0.0 {
                return Err(MediaError::AtOrigin);
            }
            // |y| = r0^p |x|^{1-p}
            let r = (r0.powf(p) / s).powf(1.0 / (p - 1.0));
            return Ok(scale(y, r / s));
        }
        match self {
            SmoothMap::Identity => Ok(*y),
            SmoothMap::Linear { matrix } => {
                let inv = Self::matrix(matrix).try_inverse().ok_or(MediaError::SingularJacobian)?;
                let x = inv * to_vec(y);
                Ok([x[0], x[1], x[2]])
            }
            SmoothMap::Fold { n } => {
                let rh = y[0].hypot(y[1]);
                if rh == 0.0 {
                    return Ok([0.0, 0.0, y[2]]);
                }
                let th = y[1].atan2(y[0]);
                if (th * n).abs() > std::f64::consts::PI {
                    return Err(MediaError::OutsideDomain(format!("angle {th} not in the image of the fold")));
                }
                let s = rh.powf(*n);
                Ok([s * (th * n).cos(), s * (th * n).sin(), y[2]])
            }
            SmoothMap::Compose { first, second } => first.inverse(&second.inverse(y)?),
            _ => unreachable!(),
        }
    }

    pub fn jacobian(&self, x: &Point) -> Result<Mat3, MediaError> {
        if let Some((r0, p)) = self.power_exponent() {
            let r = norm(x);
            if r == 0.0 {
                return Err(MediaError::AtOrigin);
            }
            let u = to_vec(x) / r;
            return Ok((Mat3::identity() - u * u.transpose() * p) * (r0.powf(p) / r.powf(p)));
        }
        match self {
            SmoothMap::Identity => Ok(Mat3::identity()),
            SmoothMap::Linear { matrix } => Ok(Self::matrix(matrix)),
            SmoothMap::Fold { n } => {
                let rh = x[0].hypot(x[1]);
                if rh == 0.0 {
                    return Err(MediaError::AxisSingularity);
                }
                // complex derivative of z^{1/n}
                let th = x[1].atan2(x[0]);
                let rho = rh.powf(1.0 / n - 1.0) / n;
                let phi = (1.0 / n - 1.0) * th;
                let (s, c) = phi.sin_cos();
                Ok(Mat3::new(rho * c, -rho * s, 0.0, rho * s, rho * c, 0.0, 0.0, 0.0, 1.0))
            }
            SmoothMap::Compose { first, second } => {
                let y = first.apply(x)?;
                Ok(second.jacobian(&y)? * first.jacobian(x)?)
            }
            _ => unreachable!(),
        }
    }
}

/// `T_* A (y) = ∇T A ∇Tᵀ / det ∇T` evaluated at `x = T⁻¹(y)`.
pub fn push_forward_tensor<F>(map: &SmoothMap, a: F, y: &Point) -> Result<CMat3, MediaError>
where
    F: Fn(&Point) -> CMat3,
{
    let x = map.inverse(y)?;
    let j = map.jacobian(&x)?;
    let det = j.determinant();
    if det.abs() < 1e-300 {
        return Err(MediaError::SingularJacobian);
    }
    let jc: CMat3 = j.map(|v| Complex64::new(v, 0.0));
    Ok(jc * a(&x) * jc.transpose() / Complex64::new(det, 0.0))
}

/// `T*v (y) = ∇T^{-T}(x) v(x)` with `x = T⁻¹(y)`.
pub fn push_forward_field<F>(map: &SmoothMap, v: F, y: &Point) -> Result<CVec3, MediaError>
where
    F: Fn(&Point) -> CVec3,
{
    let x = map.inverse(y)?;
    let jit = map.jacobian(&x)?.try_inverse().ok_or(MediaError::SingularJacobian)?.transpose();
    let vx = v(&x);
    let mut out = [Complex64::new(0.0, 0.0); 3];
    for (i, o) in out.iter_mut().enumerate() {
        for (j, vj) in vx.iter().enumerate() {
            *o += *vj * jit[(i, j)];
        }
    }
    Ok(out)
}
