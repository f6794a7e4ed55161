//! Reflected fields, the glued field that removes the localized singularity,
//! and finite-difference residual checks.

use super::{FieldSolution, MaxwellError};
use crate::media::{push_forward_tensor, CMat3, Point, SmoothMap};
use crate::specfun::CVec3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Anything that can produce `(E, H)` at a point.
pub trait FieldEvaluator: Sync {
    fn field(&self, x: &Point) -> Result<(CVec3, CVec3), MaxwellError>;
}

impl FieldEvaluator for FieldSolution {
    fn field(&self, x: &Point) -> Result<(CVec3, CVec3), MaxwellError> {
        self.eval_field(x)
    }
}

fn radius(x: &Point) -> f64 {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

/// `T*E(y) = ∇T^{-T}(x) E(x)`, `x = T⁻¹(y)`, same for `H`.
fn pull<E: FieldEvaluator + ?Sized>(inner: &E, map: &SmoothMap, y: &Point) -> Result<(CVec3, CVec3), MaxwellError> {
    let x = map.inverse(y)?;
    let jit = map.jacobian(&x)?.try_inverse().ok_or(crate::media::MediaError::SingularJacobian)?.transpose();
    let (e, h) = inner.field(&x)?;
    let apply = |v: &CVec3| {
        let mut o = [Complex64::new(0.0, 0.0); 3];
        for (i, oi) in o.iter_mut().enumerate() {
            for (j, vj) in v.iter().enumerate() {
                *oi += vj * jit[(i, j)];
            }
        }
        o
    };
    Ok((apply(&e), apply(&h)))
}

/// The reflected field `(T*E, T*H)` on the image annulus `lo < |y| < hi`.
pub struct Reflected<'a> {
    inner: &'a dyn FieldEvaluator,
    map: SmoothMap,
    image: (f64, f64),
}

impl FieldEvaluator for Reflected<'_> {
    fn field(&self, y: &Point) -> Result<(CVec3, CVec3), MaxwellError> {
        let r = radius(y);
        if r < self.image.0 * (1.0 - 1e-12) || r > self.image.1 * (1.0 + 1e-12) {
            return Err(MaxwellError::BadPoint(r));
        }
        pull(self.inner, &self.map, y)
    }
}

/// Evaluator of `(T*E, T*H)` valid on the image annulus `image = (lo, hi)`.
pub fn reflect_solution<'a>(sol: &'a dyn FieldEvaluator, map: SmoothMap, image: (f64, f64)) -> Reflected<'a> {
    Reflected { inner: sol, map, image }
}

/// `Ω_j = B_{r_j}`. In the radial setting there are no excised neighbourhoods.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GluingGeometry {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
}

/// `E − (E₁ − E₂)` in `D = Ω₃∖Ω₂`, `E₂` in `Ω₂`, `E` outside `Ω₃`,
/// with `E₁ = F*E`, `E₂ = G*E₁`.
pub struct GluedField<'a> {
    sol: &'a FieldSolution,
    f: SmoothMap,
    g: SmoothMap,
    pub geometry: GluingGeometry,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `E₂`
    Inner,
    /// `E − E₁ + E₂`
    Middle,
    /// `E`
    Outer,
}

impl GluedField<'_> {
    pub fn e1(&self, y: &Point) -> Result<(CVec3, CVec3), MaxwellError> {
        pull(self.sol, &self.f, y)
    }

    pub fn e2(&self, y: &Point) -> Result<(CVec3, CVec3), MaxwellError> {
        let x = self.g.inverse(y)?;
        let jit = self.g.jacobian(&x)?.try_inverse().ok_or(crate::media::MediaError::SingularJacobian)?.transpose();
        let (e, h) = self.e1(&x)?;
        let apply = |v: &CVec3| {
            let mut o = [Complex64::new(0.0, 0.0); 3];
            for (i, oi) in o.iter_mut().enumerate() {
                for (j, vj) in v.iter().enumerate() {
                    *oi += vj * jit[(i, j)];
                }
            }
            o
        };
        Ok((apply(&e), apply(&h)))
    }

    pub fn branch(&self, b: Branch, x: &Point) -> Result<(CVec3, CVec3), MaxwellError> {
        match b {
            Branch::Inner => self.e2(x),
            Branch::Outer => self.sol.eval_field(x),
            Branch::Middle => {
                let (e, h) = self.sol.eval_field(x)?;
                let (e1, h1) = self.e1(x)?;
                let (e2, h2) = self.e2(x)?;
                let comb = |a: CVec3, b: CVec3, c: CVec3| [a[0] - b[0] + c[0], a[1] - b[1] + c[1], a[2] - b[2] + c[2]];
                Ok((comb(e, e1, e2), comb(h, h1, h2)))
            }
        }
    }
}

impl FieldEvaluator for GluedField<'_> {
    fn field(&self, x: &Point) -> Result<(CVec3, CVec3), MaxwellError> {
        let r = radius(x);
        let b = if r <= self.geometry.r2 {
            Branch::Inner
        } else if r < self.geometry.r3 {
            Branch::Middle
        } else {
            Branch::Outer
        };
        self.branch(b, x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GluingReport {
    /// Max tangential jump across `∂Ω₂` relative to the max tangential trace there.
    pub jump_r2: f64,
    /// Same across `∂Ω₃`.
    pub jump_r3: f64,
    /// `max |∇×Ẽ − iωμ̃H̃| / δ` over the samples in `D`.
    pub residual_over_delta: f64,
    /// `max |residual − δω F_*I H₁| / max |δω F_*I H₁|`: how well the residual matches the predicted forcing.
    pub forcing_mismatch: f64,
    pub samples: usize,
}

fn tangential(v: &CVec3, x: &Point) -> CVec3 {
    let r = radius(x);
    let u = [x[0] / r, x[1] / r, x[2] / r];
    let d = v[0] * u[0] + v[1] * u[1] + v[2] * u[2];
    [v[0] - d * u[0], v[1] - d * u[1], v[2] - d * u[2]]
}

fn vnorm(v: &CVec3) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn sphere_points(r: f64, count: usize) -> Vec<Point> {
    // Fibonacci lattice
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|k| {
            let z = 1.0 - 2.0 * (k as f64 + 0.5) / count as f64;
            let s = (1.0 - z * z).sqrt();
            let ph = golden * k as f64;
            [r * s * ph.cos(), r * s * ph.sin(), r * z]
        })
        .collect()
}

/// Builds the glued field and its report. `samples` must lie in `D`; `h` is
/// the finite-difference step for the Maxwell residual.
pub fn remove_localized_singularity<'a>(
    sol: &'a FieldSolution,
    f: &SmoothMap,
    g: &SmoothMap,
    geometry: GluingGeometry,
    delta: f64,
    samples: &[Point],
    h: f64,
) -> Result<(GluedField<'a>, GluingReport), MaxwellError> {
    let GluingGeometry { r1, r2, r3 } = geometry;
    let bps = sol.medium.breakpoints();
    let has = |r: f64| bps.iter().any(|b| (b - r).abs() < 1e-12 * r);
    if !(r1 < r2 && r2 < r3) || !has(r1) || !has(r2) {
        return Err(MaxwellError::InvalidArgument(format!("geometry ({r1}, {r2}, {r3}) inconsistent with breakpoints {bps:?}")));
    }
    let img = radius(&f.apply(&[r1, 0.0, 0.0])?);
    if (img - r3).abs() > 1e-9 * r3 || sol.source.radius < r3 {
        return Err(MaxwellError::InvalidArgument(format!("F maps ∂Ω₁ to radius {img}, expected {r3}; the source must lie outside Ω₃")));
    }
    let glued = GluedField { sol, f: f.clone(), g: g.clone(), geometry };

    let mut jumps = [0.0f64; 2];
    for (slot, (r, lo, hi)) in [(r2, Branch::Inner, Branch::Middle), (r3, Branch::Middle, Branch::Outer)].into_iter().enumerate() {
        let mut scale: f64 = 0.0;
        let mut worst: f64 = 0.0;
        for x in sphere_points(r, 64) {
            let (ea, ha) = glued.branch(lo, &x)?;
            let (eb, hb) = glued.branch(hi, &x)?;
            for (a, b) in [(ea, eb), (ha, hb)] {
                let ta = tangential(&a, &x);
                let tb = tangential(&b, &x);
                scale = scale.max(vnorm(&ta)).max(vnorm(&tb));
                worst = worst.max(vnorm(&[ta[0] - tb[0], ta[1] - tb[1], ta[2] - tb[2]]));
            }
        }
        jumps[slot] = if scale > 0.0 { worst / scale } else { 0.0 };
    }

    let mut res_max: f64 = 0.0;
    let mut mismatch: f64 = 0.0;
    let mut forcing_max: f64 = 0.0;
    for x in samples {
        let r = radius(x);
        if !(r > r2 + 2.5 * h && r < r3 - 2.5 * h) {
            return Err(MaxwellError::BadPoint(r));
        }
        let curl_e = curl_fd(&|p: &Point| Ok(glued.branch(Branch::Middle, p)?.0), x, h)?;
        let (_, ht) = glued.branch(Branch::Middle, x)?;
        let (_, mu) = sol.medium.tensors_at(x);
        // inside Ω₃ the reference medium is G_*F_* of the exterior one
        let mu_t = push_forward_tensor(&f.clone().then(g.clone()), |p| sol.medium.tensors_at(p).1, x)?;
        let _ = mu;
        let iw = Complex64::new(0.0, sol.omega);
        let mut res = [Complex64::new(0.0, 0.0); 3];
        for i in 0..3 {
            let mut mh = Complex64::new(0.0, 0.0);
            for j in 0..3 {
                mh += mu_t[(i, j)] * ht[j];
            }
            res[i] = curl_e[i] - iw * mh;
        }
        let (_, h1) = glued.e1(x)?;
        let fi = push_forward_tensor(f, |_| CMat3::identity(), x)?;
        let mut pred = [Complex64::new(0.0, 0.0); 3];
        for i in 0..3 {
            for j in 0..3 {
                pred[i] += fi[(i, j)] * h1[j] * (delta * sol.omega);
            }
        }
        res_max = res_max.max(vnorm(&res));
        forcing_max = forcing_max.max(vnorm(&pred));
        mismatch = mismatch.max(vnorm(&[res[0] - pred[0], res[1] - pred[1], res[2] - pred[2]]));
    }
    let report = GluingReport {
        jump_r2: jumps[0],
        jump_r3: jumps[1],
        residual_over_delta: res_max / delta,
        forcing_mismatch: if forcing_max > 0.0 { mismatch / forcing_max } else { mismatch },
        samples: samples.len(),
    };
    Ok((glued, report))
}

type VecField<'a> = dyn Fn(&Point) -> Result<CVec3, MaxwellError> + 'a;

/// Fourth-order central differences of every component along axis `j`.
fn partial(f: &VecField, x: &Point, j: usize, h: f64) -> Result<CVec3, MaxwellError> {
    let at = |s: f64| {
        let mut p = *x;
        p[j] += s * h;
        f(&p)
    };
    let (m2, m1, p1, p2) = (at(-2.0)?, at(-1.0)?, at(1.0)?, at(2.0)?);
    let mut o = [Complex64::new(0.0, 0.0); 3];
    for i in 0..3 {
        o[i] = (m2[i] - p2[i] + (p1[i] - m1[i]) * 8.0) / (12.0 * h);
    }
    Ok(o)
}

/// `∇×v` by fourth-order central differences.
pub fn curl_fd(f: &VecField, x: &Point, h: f64) -> Result<CVec3, MaxwellError> {
    let d: Vec<CVec3> = (0..3).map(|j| partial(f, x, j, h)).collect::<Result<_, _>>()?;
    // d[j][i] = ∂_j v_i
    Ok([d[1][2] - d[2][1], d[2][0] - d[0][2], d[0][1] - d[1][0]])
}

/// `(∇×E − iωμH, ∇×H + iωεE)` at `x` by finite differences, for the medium of `sol`.
pub fn maxwell_residual(ev: &dyn FieldEvaluator, sol: &FieldSolution, x: &Point, h: f64) -> Result<(CVec3, CVec3), MaxwellError> {
    let ce = curl_fd(&|p: &Point| Ok(ev.field(p)?.0), x, h)?;
    let ch = curl_fd(&|p: &Point| Ok(ev.field(p)?.1), x, h)?;
    let (e, hh) = ev.field(x)?;
    let (eps, mu) = sol.medium.tensors_at(x);
    let iw = Complex64::new(0.0, sol.omega);
    let mut re = [Complex64::new(0.0, 0.0); 3];
    let mut rh = [Complex64::new(0.0, 0.0); 3];
    for i in 0..3 {
        let mut mh = Complex64::new(0.0, 0.0);
        let mut ee = Complex64::new(0.0, 0.0);
        for j in 0..3 {
            mh += mu[(i, j)] * hh[j];
            ee += eps[(i, j)] * e[j];
        }
        re[i] = ce[i] - iw * mh;
        rh[i] = ch[i] + iw * ee;
    }
    Ok((re, rh))
}

fn levi_civita(a: usize, b: usize, c: usize) -> f64 {
    match (a, b, c) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

/// Max over `samples` of `|div(ε∇E_a) + div(∂_aε E + iω ε ε^a μ H)|`
/// (component `a` ∈ {0,1,2}), by nested fourth-order differences with step `h`.
pub fn second_order_residual(sol: &FieldSolution, a: usize, samples: &[Point], h: f64) -> Result<f64, MaxwellError> {
    if a > 2 {
        return Err(MaxwellError::InvalidArgument(format!("component index {a}")));
    }
    let mut kinks = sol.medium.breakpoints();
    kinks.push(sol.source.radius);
    let iw = Complex64::new(0.0, sol.omega);
    let eps_at = |p: &Point| sol.medium.tensors_at(p).0;
    // W_b = Σ_c ε_bc ∂_c E_a + Σ_c ∂_a ε_bc E_c + iω Σ_{c,d,e} ε_bc ε^a_{cd} μ_de H_e
    let w = |p: &Point| -> Result<CVec3, MaxwellError> {
        let (e, hh) = sol.eval_field(p)?;
        let (eps, mu) = sol.medium.tensors_at(p);
        let grad_ea = {
            let mut g = [Complex64::new(0.0, 0.0); 3];
            for (c, gc) in g.iter_mut().enumerate() {
                *gc = partial(&|q: &Point| Ok(sol.eval_field(q)?.0), p, c, h)?[a];
            }
            g
        };
        let deps = {
            let at = |s: f64| {
                let mut q = *p;
                q[a] += s * h;
                eps_at(&q)
            };
            (at(-2.0) - at(2.0) + (at(1.0) - at(-1.0)) * Complex64::new(8.0, 0.0)) / Complex64::new(12.0 * h, 0.0)
        };
        let mut muh = [Complex64::new(0.0, 0.0); 3];
        for d in 0..3 {
            for k in 0..3 {
                muh[d] += mu[(d, k)] * hh[k];
            }
        }
        let mut out = [Complex64::new(0.0, 0.0); 3];
        for (b, ob) in out.iter_mut().enumerate() {
            for c in 0..3 {
                *ob += eps[(b, c)] * grad_ea[c] + deps[(b, c)] * e[c];
                for d in 0..3 {
                    *ob += iw * eps[(b, c)] * levi_civita(a, c, d) * muh[d];
                }
            }
        }
        Ok(out)
    };
    let mut worst: f64 = 0.0;
    for x in samples {
        let r = radius(x);
        if kinks.iter().any(|k| (k - r).abs() < 5.0 * h) {
            return Err(MaxwellError::BadPoint(r));
        }
        let mut div = Complex64::new(0.0, 0.0);
        for b in 0..3 {
            div += partial(&w, x, b, h)?[b];
        }
        worst = worst.max(div.norm());
    }
    Ok(worst)
}
