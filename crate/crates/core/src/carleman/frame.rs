//! The folding maps `L_n`, `L̂_n` and the normalising frame `T_n = L_n ∘ H`.

use super::{block_rotation, polar, CarlemanError};
use crate::media::{Mat3, Point, SmoothMap};
use nalgebra::{SymmetricEigen, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// A map value together with its jacobian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FoldValue {
    pub point: Point,
    pub jacobian: Mat3,
}

fn check_fold_parameter(n: f64) -> Result<(), CarlemanError> {
    if !(n >= 1.0) || !n.is_finite() {
        return Err(CarlemanError::InvalidArgument(format!("fold parameter n = {n} must be ≥ 1")));
    }
    Ok(())
}

/// `L_n(x) = (r̂^{1/n} cos(θ/n), r̂^{1/n} sin(θ/n), x̃)` on the half-space `x₁ ≥ 0`.
pub fn fold_map(n: f64, x: &Point) -> Result<FoldValue, CarlemanError> {
    check_fold_parameter(n)?;
    if x[0] < 0.0 {
        return Err(CarlemanError::OutsideDomain(format!("fold map needs x₁ ≥ 0, got {x:?}")));
    }
    if x[0] == 0.0 && x[1] == 0.0 {
        return Err(CarlemanError::AxisSingularity(*x));
    }
    let map = SmoothMap::fold(n)?;
    Ok(FoldValue { point: map.apply(x)?, jacobian: map.jacobian(x)? })
}

/// The boundary-flattening fold `L̂_n(x) = (r̂ cos(θ/n), r̂ sin(θ/n), x̃)`.
///
/// Only the angle is divided; for `n = 3/2` it takes `|θ| ≤ 3π/4` onto the
/// half-space `|θ| ≤ π/2`, keeping `r̂`.
pub fn flattening_map(n: f64, x: &Point) -> Result<FoldValue, CarlemanError> {
    if !(n > 0.0) || !n.is_finite() {
        return Err(CarlemanError::InvalidArgument(format!("flattening parameter n = {n} must be positive")));
    }
    let (rh, th) = polar(x);
    if rh == 0.0 {
        return Err(CarlemanError::AxisSingularity(*x));
    }
    let phi = th / n;
    let (sp, cp) = phi.sin_cos();
    let (st, ct) = th.sin_cos();
    // e_r(φ) e_r(θ)ᵀ + (1/n) e_φ(φ) e_θ(θ)ᵀ
    let j = |a: usize, b: usize| {
        let er_phi = [cp, sp];
        let ephi_phi = [-sp, cp];
        let er_th = [ct, st];
        let eth_th = [-st, ct];
        er_phi[a] * er_th[b] + ephi_phi[a] * eth_th[b] / n
    };
    Ok(FoldValue {
        point: [rh * cp, rh * sp, x[2]],
        jacobian: Mat3::new(j(0, 0), j(0, 1), 0.0, j(1, 0), j(1, 1), 0.0, 0.0, 0.0, 1.0),
    })
}

/// The frame `H = Q₁ S Qᵀ` attached to `M₀ = 𝓜(z₀)` and the anchor points.
#[derive(Debug, Clone, PartialEq)]
pub struct ConformalFrame {
    pub n: f64,
    /// The ellipticity bound `Λ` the frame was built for.
    pub lambda_bound: f64,
    pub m0: Mat3,
    pub q: Mat3,
    pub eigenvalues: [f64; 3],
    pub s: Mat3,
    pub q1: Mat3,
    pub h: Mat3,
    pub h_inv: Mat3,
    /// `γ = |det H|⁻¹`
    pub gamma: f64,
    /// `z₀ = (0, 0, z̃₀)`
    pub z0: Point,
    /// `Z₀ = T_n(z₀)`
    pub big_z0: Point,
    /// `Ẑ₀ = Z₀ + (1/n, 1/n + Λπ/(2n²), 0)`
    pub z0_hat: Point,
}

/// Residuals of the frame invariants (all should be at rounding level).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameResiduals {
    pub q_orthogonality: f64,
    pub q1_orthogonality: f64,
    /// `|Q₁ᵀe₁ − S⁻¹Qᵀe₁/|S⁻¹Qᵀe₁||`
    pub alignment: f64,
    /// `max_{i=1,2} |⟨Q₁ᵀeᵢ, SQᵀe₃⟩|`
    pub perpendicular: f64,
    /// First two components of `Q₁SQᵀ(0, 0, 1)`.
    pub axis: f64,
    /// `|H M₀ Hᵀ − I|`
    pub normalization: f64,
}

fn max_abs(m: &Mat3) -> f64 {
    m.iter().fold(0.0f64, |a, v| a.max(v.abs()))
}

/// Builds the frame for `M₀` (symmetric, eigenvalues in `[Λ⁻¹, Λ]`) at `z̃₀`.
pub fn build_frame(m0: &Mat3, z0_tilde: f64, n: f64, lambda_bound: f64) -> Result<ConformalFrame, CarlemanError> {
    check_fold_parameter(n)?;
    if !(lambda_bound >= 1.0) {
        return Err(CarlemanError::InvalidArgument(format!("Λ = {lambda_bound} must be ≥ 1")));
    }
    let asym = max_abs(&(m0 - m0.transpose()));
    if asym > 1e-12 * max_abs(m0).max(1.0) {
        return Err(CarlemanError::NotElliptic { bound: lambda_bound, detail: format!("asymmetry {asym:.2e}") });
    }
    let eig = SymmetricEigen::new(*m0);
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues: [f64; 3] = std::array::from_fn(|k| eig.eigenvalues[order[k]]);
    let tol = 1e-12;
    if eigenvalues[0] < (1.0 - tol) / lambda_bound || eigenvalues[2] > lambda_bound * (1.0 + tol) {
        return Err(CarlemanError::NotElliptic { bound: lambda_bound, detail: format!("eigenvalues {eigenvalues:?}") });
    }
    let mut q = Mat3::zeros();
    for (k, &j) in order.iter().enumerate() {
        let mut col: Vector3<f64> = eig.eigenvectors.column(j).into();
        // deterministic sign: largest component positive
        let big = (0..3).max_by(|&a, &b| col[a].abs().total_cmp(&col[b].abs())).unwrap_or(0);
        if col[big] < 0.0 {
            col = -col;
        }
        q.set_column(k, &col);
    }
    if q.determinant() < 0.0 {
        let c: Vector3<f64> = -q.column(2).into_owned();
        q.set_column(2, &c);
    }
    let s = Mat3::from_diagonal(&Vector3::from_fn(|k, _| eigenvalues[k].powf(-0.5)));
    let s_inv = Mat3::from_diagonal(&Vector3::from_fn(|k, _| eigenvalues[k].sqrt()));
    // Q₁ᵀe₁ is prescribed; Q₁ᵀe₃ must span SQᵀ{(0,0,x̃)}; Q₁ᵀe₂ completes a
    // right-handed frame (in three dimensions nothing else is left free).
    let u1 = (s_inv * q.transpose() * Vector3::x()).normalize();
    let w = s * q.transpose() * Vector3::z();
    let u3 = (w - u1 * u1.dot(&w)).normalize();
    let u2 = u3.cross(&u1);
    let q1 = Mat3::from_rows(&[u1.transpose(), u2.transpose(), u3.transpose()]);
    let h = q1 * s * q.transpose();
    let h_inv = q * s_inv * q1.transpose();
    let gamma = 1.0 / h.determinant().abs();
    let z0 = [0.0, 0.0, z0_tilde];
    let hz = h * Vector3::new(0.0, 0.0, z0_tilde);
    let big_z0 = [0.0, 0.0, hz[2]];
    let z0_hat = [1.0 / n, 1.0 / n + lambda_bound * PI / (2.0 * n * n), hz[2]];
    Ok(ConformalFrame { n, lambda_bound, m0: *m0, q, eigenvalues, s, q1, h, h_inv, gamma, z0, big_z0, z0_hat })
}

/// `K_n(x)` with the residuals of its two independent evaluations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KnMatrix {
    /// Closed form `γ^{1/2} K̃_n(x) H`.
    pub k: Mat3,
    /// Relative gap between the closed form and `∇T_n/|det ∇T_n|^{1/2} ∘ T_n⁻¹`.
    pub k_residual: f64,
    /// Relative gap between `|det ∇T_n| ∘ T_n⁻¹` and `1/(γ n² r̂^{2n−2})`.
    pub det_residual: f64,
}

impl ConformalFrame {
    fn fold(&self) -> SmoothMap {
        SmoothMap::Fold { n: self.n }
    }

    /// `T_n(y) = L_n(H y)`.
    pub fn t_map(&self, y: &Point) -> Result<Point, CarlemanError> {
        let hy = self.h * Vector3::new(y[0], y[1], y[2]);
        let w = [hy[0], hy[1], hy[2]];
        if w[0] < 0.0 {
            return Err(CarlemanError::OutsideDomain(format!("H y = {w:?} leaves the half-space")));
        }
        Ok(self.fold().apply(&w)?)
    }

    /// `L_n⁻¹(x) = H T_n⁻¹(x)`, kept separately because its first two
    /// components are of size `r̂ⁿ` and would be lost in `H⁻¹`.
    pub fn fold_preimage(&self, x: &Point) -> Result<Point, CarlemanError> {
        let (rh, th) = polar(x);
        if rh > 0.0 && th.abs() > PI / (2.0 * self.n) * (1.0 + 1e-12) {
            return Err(CarlemanError::OutsideDomain(format!("angle {th} outside |θ| ≤ π/(2n)")));
        }
        Ok(self.fold().inverse(x)?)
    }

    pub fn t_inverse(&self, x: &Point) -> Result<Point, CarlemanError> {
        let w = self.fold_preimage(x)?;
        let y = self.h_inv * Vector3::new(w[0], w[1], w[2]);
        Ok([y[0], y[1], y[2]])
    }

    /// `K̃_n(x)`: rotation by `(n−1)θ` in the `(x₁, x₂)` block and `n r̂^{n−1}` on `x̃`.
    pub fn tilde_k(&self, x: &Point) -> Mat3 {
        let (rh, th) = polar(x);
        block_rotation((self.n - 1.0) * th, self.n * rh.powf(self.n - 1.0))
    }

    /// `P(x) = diag(I₂, n² r̂^{2(n−1)})`.
    pub fn p_matrix(&self, x: &Point) -> Mat3 {
        let (rh, _) = polar(x);
        Mat3::from_diagonal(&Vector3::new(1.0, 1.0, self.n * self.n * rh.powf(2.0 * (self.n - 1.0))))
    }

    /// Membership in `𝓣_n = {T_n(y): y₁ > 0, |ỹ| < 1, 1/(4n) < r̂ < 2/n}`.
    pub fn in_transformed_sector(&self, x: &Point) -> bool {
        let n = self.n;
        let (rh, th) = polar(x);
        if !(1.0 / (4.0 * n) < rh && rh < 2.0 / n && th.abs() < PI / (2.0 * n)) {
            return false;
        }
        self.t_inverse(x).map(|y| y[2].abs() < 1.0).unwrap_or(false)
    }

    /// Membership in `𝓞_n = B_λ ∩ (𝓣_n − Ẑ₀)` (shifted coordinates).
    pub fn in_o(&self, x: &Point, lambda: f64) -> bool {
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        r < lambda && self.in_transformed_sector(&self.unshift(x))
    }

    /// `x + Ẑ₀`.
    pub fn unshift(&self, x: &Point) -> Point {
        std::array::from_fn(|k| x[k] + self.z0_hat[k])
    }

    /// Admissible ball radii `λ ∈ (5/(4n), 4/(3n))`.
    pub fn check_lambda(&self, lambda: f64) -> Result<(), CarlemanError> {
        let n = self.n;
        if !(5.0 / (4.0 * n) < lambda && lambda < 4.0 / (3.0 * n)) {
            return Err(CarlemanError::InvalidArgument(format!("λ = {lambda} outside (5/(4n), 4/(3n)) for n = {n}")));
        }
        Ok(())
    }

    /// `count` points of `𝓞_n` (shifted coordinates), drawn uniformly in
    /// `(r̂, θ, x̃)` and filtered by membership; deterministic in `seed`.
    pub fn sample_o(&self, lambda: f64, count: usize, seed: u64) -> Result<Vec<Point>, CarlemanError> {
        self.check_lambda(lambda)?;
        let n = self.n;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(count);
        let mut tries = 0usize;
        while out.len() < count {
            tries += 1;
            if tries > 10_000 * count.max(1) {
                return Err(CarlemanError::OutsideDomain(format!("𝓞_n appears empty for n = {n}, λ = {lambda}")));
            }
            let rh = rng.random_range(1.0 / (4.0 * n)..2.0 / n);
            let th = rng.random_range(-PI / (2.0 * n)..PI / (2.0 * n));
            let x3 = self.z0_hat[2] + rng.random_range(-lambda..lambda);
            let big = [rh * th.cos(), rh * th.sin(), x3];
            let x: Point = std::array::from_fn(|k| big[k] - self.z0_hat[k]);
            if self.in_o(&x, lambda) {
                out.push(x);
            }
        }
        Ok(out)
    }

    pub fn residuals(&self) -> FrameResiduals {
        let i = Mat3::identity();
        let u1 = (self.s.try_inverse().unwrap_or(i) * self.q.transpose() * Vector3::x()).normalize();
        let w = self.s * self.q.transpose() * Vector3::z();
        let q1t = self.q1.transpose();
        let axis_img = self.h * Vector3::z();
        FrameResiduals {
            q_orthogonality: max_abs(&(self.q.transpose() * self.q - i)),
            q1_orthogonality: max_abs(&(q1t * self.q1 - i)),
            alignment: (q1t.column(0) - u1).amax(),
            perpendicular: q1t.column(0).dot(&w).abs().max(q1t.column(1).dot(&w).abs()),
            axis: axis_img[0].abs().max(axis_img[1].abs()),
            normalization: max_abs(&(self.h * self.m0 * self.h.transpose() - i)),
        }
    }
}

/// `K_n(x) = ∇T_n/|det ∇T_n|^{1/2} ∘ T_n⁻¹(x)` for `x` in the image of the
/// half-space (`r̂ > 0`, `|θ| ≤ π/(2n)`).
///
/// The closed form is compared against the jacobian of `L_n` evaluated at
/// `L_n⁻¹(x)` times `H`; rows one and two are rescaled by `n r̂^{n−1}` first so
/// the determinant stays representable for large `n`.
pub fn kn_matrix(frame: &ConformalFrame, x: &Point) -> Result<KnMatrix, CarlemanError> {
    let n = frame.n;
    let (rh, _) = polar(x);
    if rh == 0.0 {
        return Err(CarlemanError::AxisSingularity(*x));
    }
    let k = frame.tilde_k(x) * frame.h * frame.gamma.sqrt();
    let w = frame.fold_preimage(x)?;
    let j = frame.fold().jacobian(&w)? * frame.h;
    let f = n * rh.powf(n - 1.0);
    let dj = Mat3::from_diagonal(&Vector3::new(f, f, 1.0)) * j;
    let det_scaled = dj.determinant().abs();
    // |det ∇T_n| = det_scaled / f², expected 1/(γ f²)
    let det_residual = (det_scaled * frame.gamma - 1.0).abs();
    let root = det_scaled.sqrt();
    let mut kg = dj / root;
    for c in 0..3 {
        kg[(2, c)] *= f;
    }
    let k_residual = max_abs(&(kg - k)) / max_abs(&k);
    Ok(KnMatrix { k, k_residual, det_residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn random_spd(rng: &mut ChaCha8Rng, lambda: f64) -> Mat3 {
        let a = Mat3::from_fn(|_, _| rng.random_range(-1.0..1.0));
        let q = a.qr().q();
        let lo = 1.0 / lambda;
        let d = Vector3::from_fn(|_, _| rng.random_range(lo..lambda));
        let m = q * Mat3::from_diagonal(&d) * q.transpose();
        (m + m.transpose()) * 0.5
    }

    #[test]
    fn fold_identity_and_fixed_ray() {
        let x = [0.7, -0.2, 0.4];
        let v = fold_map(1.0, &x).unwrap();
        for k in 0..3 {
            assert_relative_eq!(v.point[k], x[k], epsilon = 1e-15);
        }
        assert!((v.jacobian - Mat3::identity()).amax() < 1e-15);
        let v = fold_map(2.0, &[1.0, 0.0, 0.3]).unwrap();
        assert_eq!(v.point, [1.0, 0.0, 0.3]);
        assert!(matches!(fold_map(2.0, &[0.0, 0.0, 1.0]), Err(CarlemanError::AxisSingularity(_))));
        assert!(matches!(fold_map(2.0, &[-0.1, 0.2, 0.0]), Err(CarlemanError::OutsideDomain(_))));
    }

    #[test]
    fn fold_jacobians_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let n = rng.random_range(1.0..6.0);
            let x = [rng.random_range(0.05..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            for flat in [false, true] {
                let map = |p: &Point| if flat { flattening_map(1.5, p).unwrap() } else { fold_map(n, p).unwrap() };
                let jac = map(&x).jacobian;
                let h = 1e-6;
                for c in 0..3 {
                    let mut xp = x;
                    let mut xm = x;
                    xp[c] += h;
                    xm[c] -= h;
                    let (a, b) = (map(&xp).point, map(&xm).point);
                    for r in 0..3 {
                        let fd = (a[r] - b[r]) / (2.0 * h);
                        assert!((fd - jac[(r, c)]).abs() < 1e-6 * jac.amax().max(1.0), "flat={flat} n={n} ({r},{c})");
                    }
                }
            }
        }
    }

    #[test]
    fn flattening_takes_three_quarter_plane_to_half_plane() {
        let th = 0.75 * PI - 1e-9;
        let v = flattening_map(1.5, &[2.0 * th.cos(), 2.0 * th.sin(), 0.1]).unwrap();
        assert!(v.point[0] > 0.0 && v.point[0] < 1e-8);
        assert_relative_eq!(v.point[0].hypot(v.point[1]), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn identity_frame_is_trivial() {
        let f = build_frame(&Mat3::identity(), 0.3, 10.0, 1.0).unwrap();
        assert!((f.h - Mat3::identity()).amax() < 1e-15);
        assert!((f.q1 - Mat3::identity()).amax() < 1e-15);
        assert_relative_eq!(f.gamma, 1.0);
        assert_eq!(f.big_z0, [0.0, 0.0, 0.3]);
        let k = kn_matrix(&build_frame(&Mat3::identity(), 0.0, 1.0, 1.0).unwrap(), &[0.3, 0.1, 0.0]).unwrap();
        assert!((k.k - Mat3::identity()).amax() < 1e-15);
    }

    #[test]
    fn diagonal_frame_normalizes() {
        let m0 = Mat3::from_diagonal(&Vector3::new(4.0, 1.0, 1.0));
        let f = build_frame(&m0, 0.0, 10.0, 4.0).unwrap();
        assert!((f.h * m0 * f.h.transpose() - Mat3::identity()).amax() < 1e-14);
        let mut sv: Vec<f64> = f.h.singular_values().iter().copied().collect();
        sv.sort_by(f64::total_cmp);
        assert_relative_eq!(sv[0], 0.5, epsilon = 1e-14);
        assert_relative_eq!(sv[2], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn random_frames_satisfy_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let m0 = random_spd(&mut rng, 10.0);
            let f = build_frame(&m0, rng.random_range(-0.5..0.5), 20.0, 10.0).unwrap();
            let r = f.residuals();
            for v in [r.q_orthogonality, r.q1_orthogonality, r.alignment, r.perpendicular, r.axis, r.normalization] {
                assert!(v < 1e-12, "{r:?}");
            }
            assert!(f.q1.determinant() > 0.0 && f.q.determinant() > 0.0);
        }
    }

    #[test]
    fn kn_closed_form_matches_jacobian() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for &n in &[1.0, 2.5, 10.0, 40.0] {
            let f = build_frame(&random_spd(&mut rng, 3.0), 0.1, n, 3.0).unwrap();
            for _ in 0..20 {
                let rh = rng.random_range(1.0 / (4.0 * n)..2.0 / n);
                let th = rng.random_range(-PI / (2.0 * n)..PI / (2.0 * n));
                let x = [rh * th.cos(), rh * th.sin(), rng.random_range(-0.5..0.5)];
                let k = kn_matrix(&f, &x).unwrap();
                assert!(k.det_residual < 1e-10, "n={n} det {}", k.det_residual);
                assert!(k.k_residual < 1e-10, "n={n} k {}", k.k_residual);
                // rotation block: K̃ K̃ᵀ = P
                let kt = f.tilde_k(&x);
                assert!((kt * kt.transpose() - f.p_matrix(&x)).amax() < 1e-13);
            }
        }
    }

    #[test]
    fn round_trip_and_samples() {
        let f = build_frame(&Mat3::from_diagonal(&Vector3::new(2.0, 1.0, 0.5)), 0.2, 20.0, 2.0).unwrap();
        let y = [0.3, -0.1, 0.2];
        let x = f.t_map(&y).unwrap();
        let back = f.t_inverse(&x).unwrap();
        for k in 0..3 {
            assert!((back[k] - y[k]).abs() < 1e-12);
        }
        let lam = 1.3 / 20.0;
        let s = f.sample_o(lam, 50, 1).unwrap();
        assert_eq!(s.len(), 50);
        for x in &s {
            assert!(f.in_o(x, lam));
            let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
            assert!(r < lam);
        }
        assert!(f.sample_o(0.5, 1, 1).is_err());
    }
}
