//! The pushed-forward matrices `M_n = K_n A_n K_nᵀ`, the form `⟨By, y⟩` and
//! the three structural claims on `𝓞_n`.
//!
//! On `𝓣_n` the matrix `M_n` has the shape `D Ñ D` with `D = diag(1, 1, s)`,
//! `s = n r̂^{n−1}` (astronomically small for large `n`) and `Ñ` of order one.
//! The claims are evaluated in that factored form, so no quantity is ever
//! divided by `s` and nothing underflows into the comparison.

use super::{block_rotation, polar, tensor_gradient, CarlemanError, ConformalFrame, TensorField};
use crate::media::{Mat3, Point};
use nalgebra::Vector3;
use rayon::prelude::*;

/// `M_n(x) = γ K̃_n(x) H 𝓜(T_n⁻¹x) Hᵀ K̃_n(x)ᵀ` for `x` in the image of the half-space.
pub fn pushed_matrix(frame: &ConformalFrame, medium: &dyn TensorField, x: &Point) -> Result<Mat3, CarlemanError> {
    let y = frame.t_inverse(x)?;
    let n_mat = frame.h * medium.eval(&y) * frame.h.transpose();
    let k = frame.tilde_k(x);
    Ok(k * n_mat * k.transpose() * frame.gamma)
}

/// The matrix `B(x)` with `⟨B(x)y, y⟩` equal to the three-term form
/// `⟨[(My)·∇](Mx), y⟩ + ½ div(Mx)⟨My, y⟩ + ½⟨[(Mx)·∇]M y, y⟩` (not symmetrised).
pub fn b_matrix(m: &dyn TensorField, x: &Point, h: f64) -> Mat3 {
    let mm = m.eval(x);
    let dm = tensor_gradient(m, x, h);
    let xv = Vector3::new(x[0], x[1], x[2]);
    let mx = mm * xv;
    // J_kj = ∂_j (M x)_k
    let mut jac = mm;
    for (j, d) in dm.iter().enumerate() {
        let col = d * xv;
        for k in 0..3 {
            jac[(k, j)] += col[k];
        }
    }
    let div = jac.trace();
    let mut third = Mat3::zeros();
    for (j, d) in dm.iter().enumerate() {
        third += d * mx[j];
    }
    jac * mm + mm * (0.5 * div) + third * 0.5
}

/// `⟨B(x)y, y⟩`.
pub fn bform(m: &dyn TensorField, x: &Point, y: &[f64; 3], h: f64) -> f64 {
    let yv = Vector3::new(y[0], y[1], y[2]);
    yv.dot(&(b_matrix(m, x, h) * yv))
}

/// `sup_y |⟨By, y⟩| / ⟨My, y⟩` for symmetric positive definite `M`.
pub fn claim2_ratio(m: &Mat3, b: &Mat3) -> Result<f64, CarlemanError> {
    let chol = m
        .cholesky()
        .ok_or_else(|| CarlemanError::NotElliptic { bound: f64::INFINITY, detail: "matrix not positive definite".into() })?;
    let linv = chol.l().try_inverse().ok_or_else(|| CarlemanError::InvalidArgument("singular Cholesky factor".into()))?;
    let bs = (b + b.transpose()) * 0.5;
    let c = linv * bs * linv.transpose();
    let c = (c + c.transpose()) * 0.5;
    Ok(c.symmetric_eigenvalues().amax())
}

/// Factored pieces of `M̂_n` at a point: `M̂ = D Ñ D`, `∂_j M̂ = D Ŝ_j D`.
struct Factored {
    d: Vector3<f64>,
    nt: Mat3,
    shat: [Mat3; 3],
}

fn factored(frame: &ConformalFrame, medium: &dyn TensorField, big_x: &Point, h: f64) -> Result<Factored, CarlemanError> {
    let n = frame.n;
    let (rh, th) = polar(big_x);
    if rh == 0.0 {
        return Err(CarlemanError::AxisSingularity(*big_x));
    }
    let s = n * rh.powf(n - 1.0);
    let a = (n - 1.0) * th;
    let rot = block_rotation(a, 1.0);
    let (sa, ca) = a.sin_cos();
    let drot = Mat3::new(-sa, ca, 0.0, -ca, -sa, 0.0, 0.0, 0.0, 0.0);
    let y = frame.t_inverse(big_x)?;
    let my = medium.eval(&y);
    let n_mat = frame.h * my * frame.h.transpose();
    let nt = rot * n_mat * rot.transpose() * frame.gamma;
    // ∂y/∂X = H⁻¹ ∇L_n⁻¹(X), ∇L_n⁻¹ = diag(s Rᵀ, 1)
    let mut inv_fold = rot.transpose() * s;
    inv_fold[(2, 2)] = 1.0;
    let dy = frame.h_inv * inv_fold;
    let dm = tensor_gradient(medium, &y, h);
    let dtheta = [-big_x[1] / (rh * rh), big_x[0] / (rh * rh), 0.0];
    let dlns = [(n - 1.0) * big_x[0] / (rh * rh), (n - 1.0) * big_x[1] / (rh * rh), 0.0];
    let shat = std::array::from_fn(|j| {
        let mut dmj = Mat3::zeros();
        for k in 0..3 {
            dmj += dm[k] * dy[(k, j)];
        }
        let dn = frame.h * dmj * frame.h.transpose();
        let dr = drot * ((n - 1.0) * dtheta[j]);
        let dnt = (dr * n_mat * rot.transpose() + rot * dn * rot.transpose() + rot * n_mat * dr.transpose()) * frame.gamma;
        let l = Mat3::from_diagonal(&Vector3::new(0.0, 0.0, dlns[j]));
        l * nt + dnt + nt * l
    });
    Ok(Factored { d: Vector3::new(1.0, 1.0, s), nt, shat })
}

/// Per-point values of the three claims.
#[derive(Debug, Clone, Copy)]
struct ClaimValues {
    /// `|x|² / ⟨M̂x, x⟩`
    c0: f64,
    /// `|div(M̂x)| + |x|⁻² |∇(x·M̂x)·M̂x|`
    c1: f64,
    /// `sup_y |⟨B̂y, y⟩| / ⟨M̂y, y⟩`
    c2: f64,
}

fn claim_values(f: &Factored, x: &Point) -> Result<ClaimValues, CarlemanError> {
    let xv = Vector3::new(x[0], x[1], x[2]);
    let dx = f.d.component_mul(&xv);
    let mx = f.d.component_mul(&(f.nt * dx));
    let x2 = xv.norm_squared();
    let quad = dx.dot(&(f.nt * dx));
    let sd: [Vector3<f64>; 3] = std::array::from_fn(|j| f.shat[j] * dx);
    let div: f64 = (0..3).map(|j| f.d[j] * sd[j][j] + f.d[j] * f.d[j] * f.nt[(j, j)]).sum();
    let grad_dot: f64 = (0..3).map(|j| (2.0 * mx[j] + dx.dot(&sd[j])) * mx[j]).sum();
    let mut gt = Mat3::zeros();
    for j in 0..3 {
        for k in 0..3 {
            gt[(k, j)] = sd[j][k] * f.d[j];
        }
    }
    let d2 = Mat3::from_diagonal(&f.d.component_mul(&f.d));
    let mut b = (gt + f.nt * d2) * f.nt + f.nt * (0.5 * div);
    for j in 0..3 {
        b += f.shat[j] * (0.5 * mx[j]);
    }
    Ok(ClaimValues { c0: x2 / quad, c1: div.abs() + grad_dot.abs() / x2, c2: claim2_ratio(&f.nt, &b)? })
}

/// Measured constants of the three claims over a sample set.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ClaimReport {
    pub n: f64,
    pub lambda: f64,
    pub samples: usize,
    /// Smallest `Λ̂` with `⟨M̂x, x⟩ ≥ Λ̂⁻¹|x|²` on the samples.
    pub claim0: f64,
    /// Largest `|div(M̂x)| + |x|⁻²|∇(x·M̂x)·M̂x|`.
    pub claim1: f64,
    /// Largest `|⟨B̂y, y⟩| / ⟨M̂y, y⟩`.
    pub claim2: f64,
    /// `max(1, claim0, claim1, claim2)`
    pub lambda_hat: f64,
}

/// Evaluates the three claims for `M̂_n(·) = M_n(· + Ẑ₀)` at sample points of
/// `𝓞_n = B_λ ∩ (𝓣_n − Ẑ₀)`; `h` is the difference step for `𝓜`.
pub fn verify_structural_claims(
    frame: &ConformalFrame,
    medium: &dyn TensorField,
    lambda: f64,
    samples: &[Point],
    h: f64,
) -> Result<ClaimReport, CarlemanError> {
    frame.check_lambda(lambda)?;
    if samples.is_empty() {
        return Err(CarlemanError::InvalidArgument("empty sample set".into()));
    }
    let vals: Vec<ClaimValues> = samples
        .par_iter()
        .map(|x| {
            if !frame.in_o(x, lambda) {
                return Err(CarlemanError::OutsideDomain(format!("sample {x:?} not in 𝓞_n")));
            }
            let f = factored(frame, medium, &frame.unshift(x), h)?;
            claim_values(&f, x)
        })
        .collect::<Result<_, _>>()?;
    let fold = |g: fn(&ClaimValues) -> f64| vals.iter().map(g).fold(0.0f64, f64::max);
    let (claim0, claim1, claim2) = (fold(|v| v.c0), fold(|v| v.c1), fold(|v| v.c2));
    Ok(ClaimReport {
        n: frame.n,
        lambda,
        samples: samples.len(),
        claim0,
        claim1,
        claim2,
        lambda_hat: claim0.max(claim1).max(claim2).max(1.0),
    })
}

/// A smooth anisotropic test medium
/// `M(x) = M_base + a[sin(x₁ + 2x₃) B₁ + cos(x₂ − x₃) B₂]` with fixed
/// symmetric `B₁`, `B₂` of spectral norm below one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatingMedium {
    pub base: Mat3,
    pub amplitude: f64,
}

impl OscillatingMedium {
    const B1: [f64; 9] = [0.6, 0.3, 0.0, 0.3, -0.4, 0.2, 0.0, 0.2, 0.3];
    const B2: [f64; 9] = [-0.3, 0.0, 0.4, 0.0, 0.5, 0.2, 0.4, 0.2, -0.2];

    pub fn new(base: Mat3, amplitude: f64) -> Self {
        Self { base, amplitude }
    }

    fn b(k: usize) -> Mat3 {
        Mat3::from_row_slice(if k == 1 { &Self::B1 } else { &Self::B2 })
    }

    /// A `Λ` with eigenvalues in `[Λ⁻¹, Λ]` and `|∇M| ≤ Λ` everywhere.
    pub fn lambda_bound(&self) -> f64 {
        let e = self.base.symmetric_eigenvalues();
        let lo = e.min() - 2.0 * self.amplitude;
        let hi = e.max() + 2.0 * self.amplitude;
        (1.0 / lo).max(hi).max(4.0 * self.amplitude).max(1.0)
    }
}

impl TensorField for OscillatingMedium {
    fn eval(&self, x: &Point) -> Mat3 {
        let a = self.amplitude;
        self.base + Self::b(1) * (a * (x[0] + 2.0 * x[2]).sin()) + Self::b(2) * (a * (x[1] - x[2]).cos())
    }

    fn gradient(&self, x: &Point) -> Option<[Mat3; 3]> {
        let a = self.amplitude;
        let c1 = a * (x[0] + 2.0 * x[2]).cos();
        let s2 = a * (x[1] - x[2]).sin();
        Some([Self::b(1) * c1, Self::b(2) * (-s2), Self::b(1) * (2.0 * c1) + Self::b(2) * s2])
    }
}

#[cfg(test)]
mod tests {
    use super::super::{build_frame, ConstantTensor};
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn base() -> Mat3 {
        Mat3::new(1.4, 0.2, -0.1, 0.2, 1.0, 0.15, -0.1, 0.15, 0.8)
    }

    #[test]
    fn bform_of_identity() {
        let id = ConstantTensor(Mat3::identity());
        let y = [0.3, -1.2, 0.5];
        let yy = 0.09 + 1.44 + 0.25;
        assert_relative_eq!(bform(&id, &[0.2, 0.4, -0.1], &y, 1e-5), 2.5 * yy, epsilon = 1e-12);
        assert_eq!(bform(&id, &[0.2, 0.4, -0.1], &[0.0; 3], 1e-5), 0.0);
        let m = OscillatingMedium::new(base(), 0.1);
        let x = [0.3, 0.1, 0.2];
        let b1 = bform(&m, &x, &y, 1e-5);
        let b2 = bform(&m, &x, &[3.0 * y[0], 3.0 * y[1], 3.0 * y[2]], 1e-5);
        assert_relative_eq!(b2, 9.0 * b1, max_relative = 1e-12);
    }

    #[test]
    fn bform_hook_and_differences_agree() {
        let m = OscillatingMedium::new(base(), 0.2);
        let fd = |x: &Point| m.eval(x);
        let x = [0.5, -0.3, 0.7];
        let y = [1.0, 0.4, -0.6];
        assert_relative_eq!(bform(&m, &x, &y, 1e-5), bform(&fd, &x, &y, 1e-5), max_relative = 1e-8);
    }

    #[test]
    fn pushed_matrix_at_anchor_is_gamma_p() {
        let m = OscillatingMedium::new(base(), 0.1);
        for &n in &[1.0, 10.0, 40.0] {
            let f = build_frame(&m.eval(&[0.0, 0.0, 0.25]), 0.25, n, m.lambda_bound()).unwrap();
            let mz = pushed_matrix(&f, &m, &f.big_z0).unwrap();
            let want = f.p_matrix(&f.big_z0) * f.gamma;
            assert!((mz - want).amax() < 1e-12 * want.amax(), "n={n}");
            assert!((mz - mz.transpose()).amax() < 1e-14);
        }
        let f = build_frame(&Mat3::identity(), 0.0, 7.0, 1.0).unwrap();
        assert!((pushed_matrix(&f, &ConstantTensor(Mat3::identity()), &f.big_z0).unwrap() - f.p_matrix(&f.big_z0)).amax() == 0.0);
    }

    #[test]
    fn factored_form_matches_direct_differences() {
        // M̂ differenced entry by entry (each entry keeps its own relative accuracy)
        let m = OscillatingMedium::new(base(), 0.15);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for &n in &[10.0, 25.0] {
            let f = build_frame(&m.eval(&[0.0, 0.0, 0.1]), 0.1, n, m.lambda_bound()).unwrap();
            let lam = 1.3 / n;
            let mhat = |x: &Point| pushed_matrix(&f, &m, &f.unshift(x)).unwrap();
            for x in f.sample_o(lam, 10, rng.random()).unwrap() {
                let fac = factored(&f, &m, &f.unshift(&x), 1e-6).unwrap();
                let cv = claim_values(&fac, &x).unwrap();
                let mm = mhat(&x);
                let b = b_matrix(&mhat, &x, 1e-7);
                let xv = Vector3::new(x[0], x[1], x[2]);
                assert_relative_eq!(cv.c0, xv.norm_squared() / xv.dot(&(mm * xv)), max_relative = 1e-10);
                assert_relative_eq!(cv.c2, claim2_ratio(&mm, &b).unwrap(), max_relative = 1e-5);
            }
        }
    }

    #[test]
    fn claims_are_homogeneous() {
        let m = OscillatingMedium::new(base(), 0.1);
        let f = build_frame(&m.eval(&[0.0; 3]), 0.0, 20.0, m.lambda_bound()).unwrap();
        let lam = 1.3 / 20.0;
        let xs = f.sample_o(lam, 40, 4).unwrap();
        let r1 = verify_structural_claims(&f, &m, lam, &xs, 1e-6).unwrap();
        // scaling 𝓜 by c scales M̂ by c; B̂ is quadratic in M̂, so claim 0
        // scales by 1/c and claim 2 by c
        let c = 2.0;
        let scaled = |x: &Point| m.eval(x) * c;
        let r2 = verify_structural_claims(&f, &scaled, lam, &xs, 1e-6).unwrap();
        assert_relative_eq!(r2.claim0, r1.claim0 / c, max_relative = 1e-9);
        assert_relative_eq!(r2.claim2, c * r1.claim2, max_relative = 1e-5);
        assert!(verify_structural_claims(&f, &m, lam, &[[0.0, 0.0, 0.0]], 1e-6).is_err());
    }
}
