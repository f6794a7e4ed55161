//! Sign-changing media, push-forwards and the (doubly) complementary checks.
//!
//! Every medium here is radial: on each spherical layer the permittivity and
//! permeability are diagonal in the spherical frame,
//! `a(r) e_r⊗e_r + b(r) (I − e_r⊗e_r)`, with `a`, `b` constant or a power of
//! `r`. That is exactly the class the modal solver handles without
//! approximation.

mod map;

pub use map::{push_forward_field, push_forward_tensor, Mat3, SmoothMap};

use nalgebra::Matrix3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

pub type Point = [f64; 3];
pub type CMat3 = Matrix3<Complex64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MediaError {
    #[error("map evaluated at the origin")]
    AtOrigin,
    #[error("map evaluated on the fold axis")]
    AxisSingularity,
    #[error("singular jacobian")]
    SingularJacobian,
    #[error("point outside the domain: {0}")]
    OutsideDomain(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// A scalar radial profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    Constant { value: Complex64 },
    /// `coef · r^exponent`
    PowerLaw { coef: Complex64, exponent: f64 },
}

impl Profile {
    pub fn constant(v: Complex64) -> Self {
        Profile::Constant { value: v }
    }

    pub fn eval(&self, r: f64) -> Complex64 {
        match *self {
            Profile::Constant { value } => value,
            Profile::PowerLaw { coef, exponent } => coef * r.powf(exponent),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Profile::Constant { .. }) || matches!(self, Profile::PowerLaw { exponent, .. } if *exponent == 0.0)
    }

    fn scaled(&self, s: f64) -> Profile {
        match *self {
            Profile::Constant { value } => Profile::Constant { value: value * s },
            Profile::PowerLaw { coef, exponent } => Profile::PowerLaw { coef: coef * s, exponent },
        }
    }
}

/// Spherical-frame diagonal tensor `radial e_r⊗e_r + tangential (I − e_r⊗e_r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Uniaxial {
    pub radial: Profile,
    pub tangential: Profile,
}

impl Uniaxial {
    pub fn isotropic(p: Profile) -> Self {
        Uniaxial { radial: p, tangential: p }
    }

    pub fn constant(v: Complex64) -> Self {
        Self::isotropic(Profile::constant(v))
    }

    /// `(radial, tangential)` at radius `r`.
    pub fn eval(&self, r: f64) -> (Complex64, Complex64) {
        (self.radial.eval(r), self.tangential.eval(r))
    }

    /// The value when the tensor is a constant multiple of `I`.
    pub fn constant_isotropic(&self) -> Option<Complex64> {
        if self.radial.is_constant() && self.radial == self.tangential {
            Some(self.radial.eval(1.0))
        } else {
            None
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Uniaxial { radial: self.radial.scaled(s), tangential: self.tangential.scaled(s) }
    }
}

/// Cartesian form of a spherical-frame diagonal tensor at `x`.
pub fn cartesian_tensor(radial: Complex64, tangential: Complex64, x: &Point) -> CMat3 {
    let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    let u = [x[0] / r, x[1] / r, x[2] / r];
    CMat3::from_fn(|i, j| {
        let uu = u[i] * u[j];
        let id = if i == j { 1.0 } else { 0.0 };
        radial * uu + tangential * (id - uu)
    })
}

/// One spherical layer `inner < r < outer_radius` (`None` = unbounded).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub outer_radius: Option<f64>,
    pub eps: Uniaxial,
    pub mu: Uniaxial,
    /// `δ`, added as `+iδ I` to both coefficients.
    pub loss: f64,
    /// Designated lossy (plasmonic) layer: [`RadialMedium::with_loss`] acts on these.
    #[serde(default)]
    pub lossy: bool,
}

impl Layer {
    pub fn constant(outer_radius: Option<f64>, eps: Complex64, mu: Complex64) -> Self {
        Layer { outer_radius, eps: Uniaxial::constant(eps), mu: Uniaxial::constant(mu), loss: 0.0, lossy: false }
    }

    /// `(ε_r, ε_t, μ_r, μ_t)` including the loss term.
    pub fn eval(&self, r: f64) -> [Complex64; 4] {
        let d = Complex64::new(0.0, self.loss);
        let (er, et) = self.eps.eval(r);
        let (mr, mt) = self.mu.eval(r);
        [er + d, et + d, mr + d, mt + d]
    }

    /// `(ε, μ)` when both are constant multiples of `I`.
    pub fn constant_isotropic(&self) -> Option<(Complex64, Complex64)> {
        let d = Complex64::new(0.0, self.loss);
        Some((self.eps.constant_isotropic()? + d, self.mu.constant_isotropic()? + d))
    }
}

/// Which constructor produced a medium, and with what parameters.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Provenance {
    pub constructor: String,
    pub parameters: BTreeMap<String, f64>,
}

/// Piecewise radial medium; layers ordered from the origin outwards, the last one unbounded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialMedium {
    pub layers: Vec<Layer>,
    pub provenance: Provenance,
}

impl RadialMedium {
    pub fn new(layers: Vec<Layer>, provenance: Provenance) -> Result<Self, MediaError> {
        let m = RadialMedium { layers, provenance };
        m.validate()?;
        Ok(m)
    }

    pub fn vacuum() -> Self {
        RadialMedium {
            layers: vec![Layer::constant(None, c(1.0), c(1.0))],
            provenance: Provenance { constructor: "vacuum".into(), ..Default::default() },
        }
    }

    pub fn validate(&self) -> Result<(), MediaError> {
        let k = self.layers.len();
        if k == 0 {
            return Err(MediaError::InvalidParameter("medium has no layers".into()));
        }
        let mut prev = 0.0;
        for (i, l) in self.layers.iter().enumerate() {
            match (l.outer_radius, i + 1 == k) {
                (None, true) => {}
                (Some(r), false) if r > prev && r.is_finite() => prev = r,
                _ => return Err(MediaError::InvalidParameter(format!("layer {i}: breakpoints must increase and only the last layer is unbounded"))),
            }
            if !(l.loss >= 0.0) {
                return Err(MediaError::InvalidParameter(format!("layer {i}: loss must be >= 0")));
            }
        }
        let last = &self.layers[k - 1];
        if last.constant_isotropic() != Some((c(1.0), c(1.0))) {
            return Err(MediaError::InvalidParameter("outermost layer must be vacuum (I, I)".into()));
        }
        if self.layers[0].constant_isotropic().is_none() {
            return Err(MediaError::InvalidParameter("innermost layer must be constant and isotropic".into()));
        }
        Ok(())
    }

    /// Finite breakpoints `ρ₁ < … < ρ_{K−1}`.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.layers.iter().filter_map(|l| l.outer_radius).collect()
    }

    /// Index of the layer containing `r` (a breakpoint belongs to the inner layer).
    pub fn layer_index(&self, r: f64) -> usize {
        self.layers.iter().position(|l| l.outer_radius.is_none_or(|o| r <= o)).unwrap_or(self.layers.len() - 1)
    }

    pub fn inner_radius(&self, i: usize) -> f64 {
        if i == 0 {
            0.0
        } else {
            self.layers[i - 1].outer_radius.expect("inner layers are bounded")
        }
    }

    /// `(ε_r, ε_t, μ_r, μ_t)` at radius `r`.
    pub fn eval(&self, r: f64) -> [Complex64; 4] {
        self.layers[self.layer_index(r)].eval(r)
    }

    /// Cartesian `(ε, μ)` at a point.
    pub fn tensors_at(&self, x: &Point) -> (CMat3, CMat3) {
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        let [er, et, mr, mt] = self.eval(r);
        (cartesian_tensor(er, et, x), cartesian_tensor(mr, mt, x))
    }

    pub fn max_loss(&self) -> f64 {
        self.layers.iter().map(|l| l.loss).fold(0.0, f64::max)
    }

    /// Copy with the loss of every lossy layer replaced by `delta`.
    pub fn with_loss(&self, delta: f64) -> Self {
        let mut m = self.clone();
        for l in &mut m.layers {
            if l.lossy {
                l.loss = delta;
            }
        }
        m.provenance.parameters.insert("delta".into(), delta);
        m
    }

    pub fn parameter(&self, key: &str) -> Option<f64> {
        self.provenance.parameters.get(key).copied()
    }
}

fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// The shell of the doubly complementary example:
/// `−(r₂/r)^p [e_r⊗e_r/(p−1) + (p−1)(I − e_r⊗e_r)]`.
pub fn dcm_shell_tensor(r2: f64, p: f64) -> Uniaxial {
    let a = r2.powf(p);
    Uniaxial {
        radial: Profile::PowerLaw { coef: c(-a / (p - 1.0)), exponent: -p },
        tangential: Profile::PowerLaw { coef: c(-a * (p - 1.0)), exponent: -p },
    }
}

/// Core `(mI, mI)` in `B_{r₁}`, shell `M + iδI` in `B_{r₂}∖B_{r₁}`, vacuum outside;
/// records `r₃ = r₂^p/r₁^{p−1}` and `m = (r₂/r₁)^p`.
pub fn make_dcm_example(r1: f64, r2: f64, p: f64, delta: f64) -> Result<RadialMedium, MediaError> {
    if !(p > 1.0) {
        return Err(MediaError::InvalidParameter(format!("p = {p} must exceed 1")));
    }
    if !(r2 > r1 && r1 > 0.0) || !(delta >= 0.0) {
        return Err(MediaError::InvalidParameter("need r2 > r1 > 0 and delta >= 0".into()));
    }
    let m = (r2 / r1).powf(p);
    let r3 = r2.powf(p) / r1.powf(p - 1.0);
    let shell = dcm_shell_tensor(r2, p);
    RadialMedium::new(
        vec![
            Layer::constant(Some(r1), c(m), c(m)),
            Layer { outer_radius: Some(r2), eps: shell, mu: shell, loss: delta, lossy: true },
            Layer::constant(None, c(1.0), c(1.0)),
        ],
        Provenance {
            constructor: "dcm_example".into(),
            parameters: params(&[("r1", r1), ("r2", r2), ("r3", r3), ("p", p), ("m", m), ("delta", delta)]),
        },
    )
}

/// The maps `F(x) = r₂^p x/|x|^p` and `G(x) = r₃^q x/|x|^q`, `q = p/(p−1)`, of a DCM example.
pub fn dcm_maps(medium: &RadialMedium) -> Result<(SmoothMap, SmoothMap), MediaError> {
    let (Some(r2), Some(r3), Some(p)) = (medium.parameter("r2"), medium.parameter("r3"), medium.parameter("p")) else {
        return Err(MediaError::InvalidParameter("medium does not record r2, r3, p".into()));
    };
    Ok((SmoothMap::power(r2, p)?, SmoothMap::power(r3, p / (p - 1.0))?))
}

/// The limiting medium of a DCM example: `(G∘F)_*` of the core in `B_{r₃}`,
/// vacuum outside. `G∘F` is the dilation `x ↦ λx` with `λ = (r₃/r₂)^q = m`, so
/// the core `(mI, mI)` is pushed to `(I, I)` and the limit is vacuum.
pub fn dcm_reference(medium: &RadialMedium) -> Result<RadialMedium, MediaError> {
    let (Some(r2), Some(r3), Some(p)) = (medium.parameter("r2"), medium.parameter("r3"), medium.parameter("p")) else {
        return Err(MediaError::InvalidParameter("medium does not record r2, r3, p".into()));
    };
    let Some((eps, mu)) = medium.layers.first().and_then(Layer::constant_isotropic) else {
        return Err(MediaError::InvalidParameter("core must be constant and isotropic".into()));
    };
    let lambda = (r3 / r2).powf(p / (p - 1.0));
    let mut parameters = medium.provenance.parameters.clone();
    parameters.insert("lambda".into(), lambda);
    RadialMedium::new(
        vec![Layer::constant(Some(r3), eps / lambda, mu / lambda), Layer::constant(None, c(1.0), c(1.0))],
        Provenance { constructor: "dcm_reference".into(), parameters },
    )
}

/// A superlens and its magnified reference medium.
#[derive(Debug, Clone, PartialEq)]
pub struct Superlens {
    pub medium: RadialMedium,
    pub reference: RadialMedium,
}

/// Object `(ε_O, μ_O)` in `B_{r₀}`, `(mI, mI)` in `B_{r₁}∖B_{r₀}`, the Kelvin
/// complement `F⁻¹_*I + iδI` in `B_{r₂}∖B_{r₁}` (`r₂ = m r₀`), vacuum outside.
/// The reference is `(ε_O/m, μ_O/m)` in `B_{r₂}` and vacuum outside.
pub fn make_superlens(r0: f64, m: f64, r1: f64, object: (Complex64, Complex64), delta: f64) -> Result<Superlens, MediaError> {
    if !(m > 1.0) || !(r0 > 0.0) || !(delta >= 0.0) {
        return Err(MediaError::InvalidParameter("need m > 1, r0 > 0, delta >= 0".into()));
    }
    let r2 = m * r0;
    if r1 < m.sqrt() * r0 * (1.0 - 1e-12) || r1 >= r2 {
        return Err(MediaError::InvalidParameter(format!("r1 = {r1} must lie in [sqrt(m) r0, m r0) = [{}, {r2})", m.sqrt() * r0)));
    }
    let r3 = r2 * r2 / r1;
    let shell = Uniaxial::isotropic(Profile::PowerLaw { coef: c(-r2 * r2), exponent: -2.0 });
    let parameters = params(&[("r0", r0), ("r1", r1), ("r2", r2), ("r3", r3), ("m", m), ("delta", delta)]);
    let medium = RadialMedium::new(
        vec![
            Layer::constant(Some(r0), object.0, object.1),
            Layer::constant(Some(r1), c(m), c(m)),
            Layer { outer_radius: Some(r2), eps: shell, mu: shell, loss: delta, lossy: true },
            Layer::constant(None, c(1.0), c(1.0)),
        ],
        Provenance { constructor: "superlens".into(), parameters: parameters.clone() },
    )?;
    let reference = RadialMedium::new(
        vec![Layer::constant(Some(r2), object.0 / m, object.1 / m), Layer::constant(None, c(1.0), c(1.0))],
        Provenance { constructor: "superlens_reference".into(), parameters },
    )?;
    Ok(Superlens { medium, reference })
}

/// A constant isotropic piece of a cloaked profile, `(inner, outer, ε, μ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfilePiece {
    pub inner: f64,
    pub outer: f64,
    pub eps: Complex64,
    pub mu: Complex64,
}

/// Cloak: the cloaked profile on `(r₂, r₃)` (vacuum where no piece is given),
/// its Kelvin complement `F⁻¹_*` plus `iδI` on `(r₁, r₂)`, `(mI, mI)` in `B_{r₁}`
/// with `r₁ = r₂²/r₃`, `m = r₃²/r₂²`, vacuum outside `B_{r₃}`.
pub fn make_cm_cloak(r2: f64, r3: f64, profile: &[ProfilePiece], delta: f64) -> Result<RadialMedium, MediaError> {
    if !(r3 > r2 && r2 > 0.0) || !(delta >= 0.0) {
        return Err(MediaError::InvalidParameter("need r3 > r2 > 0 and delta >= 0".into()));
    }
    // fill the cloaked annulus with pieces, vacuum in the gaps
    let mut pieces: Vec<ProfilePiece> = Vec::new();
    let mut at = r2;
    let mut sorted = profile.to_vec();
    sorted.sort_by(|a, b| a.inner.partial_cmp(&b.inner).expect("finite radii"));
    for p in sorted {
        if p.inner < at - 1e-12 || p.outer <= p.inner || p.outer > r3 + 1e-12 {
            return Err(MediaError::InvalidParameter(format!("profile piece ({}, {}) outside ({r2}, {r3}) or overlapping", p.inner, p.outer)));
        }
        if p.inner > at {
            pieces.push(ProfilePiece { inner: at, outer: p.inner, eps: c(1.0), mu: c(1.0) });
        }
        pieces.push(p);
        at = p.outer;
    }
    if at < r3 {
        pieces.push(ProfilePiece { inner: at, outer: r3, eps: c(1.0), mu: c(1.0) });
    }
    let r1 = r2 * r2 / r3;
    let m = r3 * r3 / (r2 * r2);
    let mut layers = vec![Layer::constant(Some(r1), c(m), c(m))];
    // the Kelvin image of (s_a, s_b) is (r2²/s_b, r2²/s_a), traversed in reverse
    for p in pieces.iter().rev() {
        let outer = r2 * r2 / p.inner;
        let e = Uniaxial::isotropic(Profile::PowerLaw { coef: -p.eps * r2 * r2, exponent: -2.0 });
        let u = Uniaxial::isotropic(Profile::PowerLaw { coef: -p.mu * r2 * r2, exponent: -2.0 });
        layers.push(Layer { outer_radius: Some(outer), eps: e, mu: u, loss: delta, lossy: true });
    }
    if let Some(l) = layers.last_mut() {
        l.outer_radius = Some(r2);
    }
    for p in &pieces {
        layers.push(Layer::constant(Some(p.outer), p.eps, p.mu));
    }
    if let Some(l) = layers.last_mut() {
        l.outer_radius = Some(r3);
    }
    layers.push(Layer::constant(None, c(1.0), c(1.0)));
    RadialMedium::new(
        layers,
        Provenance {
            constructor: "cm_cloak".into(),
            parameters: params(&[("r1", r1), ("r2", r2), ("r3", r3), ("m", m), ("delta", delta)]),
        },
    )
}

/// Max Frobenius deviation, over `samples ⊂ Ω₃∖Ω₂`, of the two conditions
/// `(G∘F)_*(ε, μ) = (ε, μ)` and `F_*(ε, μ) = (ε, μ)`, each side evaluated
/// from `medium` (the pull-back points land in the core and the shell).
pub fn dcm_verify(medium: &RadialMedium, f: &SmoothMap, g: &SmoothMap, samples: &[Point]) -> Result<f64, MediaError> {
    let (Some(r2), Some(r3)) = (medium.parameter("r2"), medium.parameter("r3")) else {
        return Err(MediaError::InvalidParameter("medium does not record r2, r3".into()));
    };
    dcm_verify_with(medium, f, g, samples, r2, r3)
}

/// [`dcm_verify`] with explicit `Ω₂ = B_{r₂}`, `Ω₃ = B_{r₃}`.
pub fn dcm_verify_with(medium: &RadialMedium, f: &SmoothMap, g: &SmoothMap, samples: &[Point], r2: f64, r3: f64) -> Result<f64, MediaError> {
    let gf = f.clone().then(g.clone());
    let eps = |x: &Point| medium.tensors_at(x).0;
    let mu = |x: &Point| medium.tensors_at(x).1;
    let mut worst: f64 = 0.0;
    for y in samples {
        let r = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt();
        if !(r > r2 && r < r3) {
            return Err(MediaError::OutsideDomain(format!("sample radius {r} not in ({r2}, {r3})")));
        }
        let (e, u) = medium.tensors_at(y);
        for (pushed, target) in [
            (push_forward_tensor(&gf, eps, y)?, e),
            (push_forward_tensor(&gf, mu, y)?, u),
            (push_forward_tensor(f, eps, y)?, e),
            (push_forward_tensor(f, mu, y)?, u),
        ] {
            worst = worst.max((pushed - target).norm());
        }
    }
    Ok(worst)
}

/// Replaces every non-constant layer by `layer_count` constant sub-layers
/// sampled at their midpoints; constant layers are unchanged.
pub fn staircase(medium: &RadialMedium, layer_count: usize) -> Result<RadialMedium, MediaError> {
    if layer_count == 0 {
        return Err(MediaError::InvalidParameter("layer_count must be >= 1".into()));
    }
    let mut layers = Vec::new();
    for (i, l) in medium.layers.iter().enumerate() {
        let graded = !(l.eps.radial.is_constant() && l.eps.tangential.is_constant() && l.mu.radial.is_constant() && l.mu.tangential.is_constant());
        match (graded, l.outer_radius) {
            (true, Some(b)) => {
                let a = medium.inner_radius(i);
                let h = (b - a) / layer_count as f64;
                for k in 0..layer_count {
                    let mid = a + (k as f64 + 0.5) * h;
                    let sample = |u: &Uniaxial| Uniaxial {
                        radial: Profile::constant(u.radial.eval(mid)),
                        tangential: Profile::constant(u.tangential.eval(mid)),
                    };
                    let outer = if k + 1 == layer_count { b } else { a + (k + 1) as f64 * h };
                    layers.push(Layer { outer_radius: Some(outer), eps: sample(&l.eps), mu: sample(&l.mu), loss: l.loss, lossy: l.lossy });
                }
            }
            _ => layers.push(l.clone()),
        }
    }
    let mut provenance = medium.provenance.clone();
    provenance.parameters.insert("staircase_layers".into(), layer_count as f64);
    RadialMedium::new(layers, provenance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn shell_samples(r2: f64, r3: f64, n: usize, seed: u64) -> Vec<Point> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let th: f64 = rng.random_range(0.0..std::f64::consts::PI);
                let ph: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                let r = rng.random_range(r2 + 1e-3..r3 - 1e-3);
                [r * th.sin() * ph.cos(), r * th.sin() * ph.sin(), r * th.cos()]
            })
            .collect()
    }

    #[test]
    fn dcm_example_values() {
        let m = make_dcm_example(1.0, 2.0, 2.0, 0.0).unwrap();
        let [er, et, ..] = m.eval(2f64.sqrt());
        assert!((er - c(-2.0)).norm() < 1e-14 && (et - c(-2.0)).norm() < 1e-14);
        assert_eq!(m.eval(0.5)[0], c(4.0));
        assert_eq!(m.parameter("r3"), Some(4.0));
        let m3 = make_dcm_example(1.0, 2.0, 3.0, 0.0).unwrap();
        assert!((m3.eval(2.0)[0] - c(-0.5)).norm() < 1e-14);
        assert!(make_dcm_example(1.0, 2.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn dcm_structure_holds() {
        for p in [1.5, 2.0, 3.0] {
            let m = make_dcm_example(1.0, 2.0, p, 0.0).unwrap();
            let (f, g) = dcm_maps(&m).unwrap();
            let r3 = m.parameter("r3").unwrap();
            let res = dcm_verify(&m, &f, &g, &shell_samples(2.0, r3, 30, 1)).unwrap();
            assert!(res < 1e-10, "p={p} residual {res}");
            // F is the identity on ∂Ω₂
            let y = f.apply(&[0.0, 2.0 * 0.6, 2.0 * 0.8]).unwrap();
            assert!((y[1] - 1.2).abs() < 1e-12 && (y[2] - 1.6).abs() < 1e-12);
        }
    }

    #[test]
    fn perturbed_shell_is_detected() {
        let mut m = make_dcm_example(1.0, 2.0, 2.0, 0.0).unwrap();
        m.layers[1].eps = m.layers[1].eps.scaled(1.01);
        let (f, g) = dcm_maps(&m).unwrap();
        let res = dcm_verify(&m, &f, &g, &shell_samples(2.0, 4.0, 30, 2)).unwrap();
        let want = 0.01 * 3f64.sqrt();
        assert!((res - want).abs() < 1e-3 * want, "{res}");
        let vac = RadialMedium::vacuum();
        let res = dcm_verify_with(&vac, &SmoothMap::Identity, &SmoothMap::Identity, &shell_samples(2.0, 4.0, 5, 3), 2.0, 4.0).unwrap();
        assert_eq!(res, 0.0);
    }

    #[test]
    fn dcm_reference_is_pushed_vacuum() {
        for p in [1.5, 2.0, 3.0] {
            let m = make_dcm_example(1.0, 2.0, p, 0.0).unwrap();
            let (f, g) = dcm_maps(&m).unwrap();
            let gf = f.then(g);
            let reference = dcm_reference(&m).unwrap();
            let r3 = m.parameter("r3").unwrap();
            for y in shell_samples(0.3, r3, 10, 4) {
                let core = m.layers[0].constant_isotropic().unwrap().0;
                let pushed = push_forward_tensor(&gf, |_| CMat3::identity() * core, &y).unwrap();
                assert!((pushed - reference.tensors_at(&y).0).norm() < 1e-12, "p={p}");
            }
            // the dilation factor equals the core index, so the limit is vacuum
            assert!((reference.eval(0.5)[0] - c(1.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn superlens_geometry() {
        let s = make_superlens(0.5, 4.0, 1.0, (c(2.0), c(2.0)), 0.0).unwrap();
        assert_eq!(s.medium.parameter("r2"), Some(2.0));
        assert_eq!(s.medium.parameter("r3"), Some(4.0));
        assert!((s.medium.eval(2f64.sqrt())[1] - c(-2.0)).norm() < 1e-14);
        assert_eq!(s.reference.eval(1.0)[0], c(0.5));
        assert!(make_superlens(0.5, 4.0, 0.9, (c(2.0), c(2.0)), 0.0).is_err());
    }

    #[test]
    fn cloak_reduces_to_dcm_shell() {
        let cl = make_cm_cloak(1.0, 2.0, &[], 0.0).unwrap();
        assert_eq!(cl.parameter("r1"), Some(0.5));
        assert_eq!(cl.parameter("m"), Some(4.0));
        let dcm = make_dcm_example(0.5, 1.0, 2.0, 0.0).unwrap();
        for r in [0.55, 0.7, 0.95] {
            let a = cl.eval(r);
            let b = dcm.eval(r);
            for k in 0..4 {
                assert!((a[k] - b[k]).norm() < 1e-12);
            }
        }
        let piece = ProfilePiece { inner: 1.0, outer: 2.0, eps: c(3.0), mu: c(2.0) };
        let cl = make_cm_cloak(1.0, 4.0, &[piece], 0.0).unwrap();
        // (I, I) between 2 r2 and r3, and the complement of the piece on (r2²/(2r2), r2)
        assert_eq!(cl.eval(3.0)[0], c(1.0));
        assert_eq!(cl.eval(1.5)[0], c(3.0));
        assert!((cl.eval(0.75)[0] - c(-3.0 / 0.5625)).norm() < 1e-12);
    }

    #[test]
    fn staircase_samples_midpoints() {
        let m = make_dcm_example(1.0, 2.0, 2.0, 0.0).unwrap();
        let s = staircase(&m, 1).unwrap();
        assert_eq!(s.layers.len(), 3);
        assert!((s.eval(1.2)[0] - c(-4.0 / 2.25)).norm() < 1e-14);
        let vac = RadialMedium::vacuum();
        assert_eq!(staircase(&vac, 7).unwrap().layers, vac.layers);
    }

    #[test]
    fn json_roundtrip() {
        let m = make_dcm_example(1.0, 2.0, 3.0, 1e-3).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        let back: RadialMedium = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
    }
}
