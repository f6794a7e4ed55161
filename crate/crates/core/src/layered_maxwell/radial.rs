//! Per-mode radial problem.
//!
//! For a mode of degree `n` and a spherical-frame diagonal medium the
//! tangential traces reduce to a pair `(F, G)` with `F = r E_V` (TE) or
//! `F = r H_V` (TM), and
//!
//! ```text
//! F' = a G,    G' = −(ω² b − n(n+1) / (c r²)) F
//! ```
//!
//! where `(a, b, c) = (μ_t, ε_t, μ_r)` for TE and `(ε_t, μ_t, ε_r)` for TM.
//! Both `F` and `G` are continuous across interfaces. In constant isotropic
//! layers the solutions are `r j_n(kr)`, `r y_n(kr)` (exterior: `r h_n(kr)`);
//! graded layers are integrated by Gauss collocation. States are carried as
//! [`Scaled`] pairs so nothing overflows at high order or large loss.

use super::{MaxwellError, Polarization};
use crate::media::{Layer, RadialMedium};
use crate::quad::gauss_legendre_on;
use crate::specfun::{spherical_bessel_with_derivative, BesselKind, Scaled};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// `(F, G)` at some radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub f: Scaled,
    pub g: Scaled,
}

impl State {
    fn times(&self, s: Scaled) -> State {
        State { f: self.f * s, g: self.g * s }
    }

    /// Common-exponent mantissas.
    fn split(&self) -> ([Complex64; 2], i64) {
        let e = if self.f.is_zero() {
            self.g.e
        } else if self.g.is_zero() {
            self.f.e
        } else {
            self.f.e.max(self.g.e)
        };
        let down = |s: &Scaled| if s.is_zero() { Complex64::new(0.0, 0.0) } else { Scaled { m: s.m, e: s.e - e }.to_c64() };
        ([down(&self.f), down(&self.g)], e)
    }

    fn join(y: [Complex64; 2], e: i64) -> State {
        State { f: Scaled::new(y[0], e), g: Scaled::new(y[1], e) }
    }

    fn ln_norm(&self) -> f64 {
        let (y, e) = self.split();
        (y[0].norm_sqr() + y[1].norm_sqr()).sqrt().ln() + e as f64 * std::f64::consts::LN_10
    }
}

/// `(a, b, c)` of the radial system at `r`.
pub(crate) fn abc(layer: &Layer, r: f64, pol: Polarization) -> [Complex64; 3] {
    let [er, et, mr, mt] = layer.eval(r);
    match pol {
        Polarization::TE => [mt, et, mr],
        Polarization::TM => [et, mt, er],
    }
}

fn system(layer: &Layer, r: f64, lam2: f64, omega: f64, pol: Polarization) -> [[Complex64; 2]; 2] {
    let [a, b, c] = abc(layer, r, pol);
    let z = Complex64::new(0.0, 0.0);
    [[z, a], [-(b * omega * omega - lam2 / (c * r * r)), z]]
}

/// Butcher tableau of the `s`-stage Gauss collocation method (order `2s`).
#[derive(Debug, Clone)]
/// Gauss collocation tableau with `s` stages (order `2s`).
pub struct Collocation {
    c: Vec<f64>,
    b: Vec<f64>,
    a: Vec<Vec<f64>>,
}

impl Collocation {
    pub fn new(s: usize) -> Self {
        let rule = gauss_legendre_on(s, 0.0, 1.0);
        let c: Vec<f64> = rule.iter().map(|p| p.0).collect();
        let b: Vec<f64> = rule.iter().map(|p| p.1).collect();
        // a_ij = ∫_0^{c_i} ℓ_j, exact with an s-point rule
        let lagrange = |j: usize, t: f64| {
            let mut v = 1.0;
            for (k, ck) in c.iter().enumerate() {
                if k != j {
                    v *= (t - ck) / (c[j] - ck);
                }
            }
            v
        };
        let a = c
            .iter()
            .map(|&ci| (0..s).map(|j| gauss_legendre_on(s, 0.0, ci).iter().map(|&(t, w)| w * lagrange(j, t)).sum()).collect())
            .collect();
        Collocation { c, b, a }
    }

    /// Propagator of `y' = A(r) y` over `[r0, r0 + h]`.
    fn step(&self, r0: f64, h: f64, mat: &dyn Fn(f64) -> [[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
        let s = self.c.len();
        let am: Vec<[[Complex64; 2]; 2]> = self.c.iter().map(|&ci| mat(r0 + ci * h)).collect();
        let dim = 2 * s;
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        for i in 0..s {
            for j in 0..s {
                for p in 0..2 {
                    for q in 0..2 {
                        let id = if i == j && p == q { 1.0 } else { 0.0 };
                        m[(2 * i + p, 2 * j + q)] = Complex64::new(id, 0.0) - am[j][p][q] * (h * self.a[i][j]);
                    }
                }
            }
        }
        let mut rhs = DMatrix::<Complex64>::zeros(dim, 2);
        for i in 0..s {
            rhs[(2 * i, 0)] = Complex64::new(1.0, 0.0);
            rhs[(2 * i + 1, 1)] = Complex64::new(1.0, 0.0);
        }
        let z = m.lu().solve(&rhs).expect("collocation system is regular for small steps");
        let mut phi = [[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)], [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]];
        for j in 0..s {
            for p in 0..2 {
                for q in 0..2 {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for t in 0..2 {
                        acc += am[j][p][t] * z[(2 * j + t, q)];
                    }
                    phi[p][q] += acc * (h * self.b[j]);
                }
            }
        }
        phi
    }
}

/// Integration controls for graded layers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradedControl {
    /// Gauss stages (method order is twice this).
    pub stages: usize,
    /// Upper bound on `h·κ`, `κ` the local oscillation/growth rate.
    pub phase_step: f64,
    /// Minimum number of steps per graded layer.
    pub min_steps: usize,
}

impl Default for GradedControl {
    fn default() -> Self {
        GradedControl { stages: 6, phase_step: 0.5, min_steps: 8 }
    }
}

fn local_rate(layer: &Layer, r: f64, lam2: f64, omega: f64, pol: Polarization) -> f64 {
    let m = system(layer, r, lam2, omega, pol);
    (m[0][1] * m[1][0]).norm().sqrt() + 1.0 / r
}

/// Graded-layer grid with the state at every node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradedTrack {
    pub nodes: Vec<f64>,
    pub states: Vec<State>,
}

/// Radial representation on one segment `(lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SegmentRepr {
    /// `F = c1 r j_n(kr) + c2 r y_n(kr)`
    Bessel { k: Complex64, a: Complex64, c1: Scaled, c2: Scaled },
    /// `F = c r h_n(kr)`
    Hankel { k: Complex64, a: Complex64, c: Scaled },
    Graded(GradedTrack),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub lo: f64,
    /// `None` = unbounded.
    pub hi: Option<f64>,
    pub layer: usize,
    pub repr: SegmentRepr,
}

/// Isotropic wavenumber `ω√(εμ)` on the branch `Im k ≥ 0`.
pub fn wavenumber(eps: Complex64, mu: Complex64, omega: f64) -> Complex64 {
    let k = (eps * mu).sqrt() * omega;
    if k.im < 0.0 || (k.im == 0.0 && k.re < 0.0) {
        -k
    } else {
        k
    }
}

/// `(P, P')` with `P = r f_n(kr)`.
fn riccati(kind: BesselKind, n: usize, k: Complex64, r: f64) -> Result<(Scaled, Scaled), MaxwellError> {
    let z = k * r;
    let (f, fp) = spherical_bessel_with_derivative(kind, n, z)?;
    let rs = Scaled::from_f64(r);
    Ok((rs * f, f + fp * z))
}

fn bessel_state(n: usize, k: Complex64, a: Complex64, c1: Scaled, c2: Scaled, r: f64) -> Result<State, MaxwellError> {
    let mut f = Scaled::ZERO;
    let mut fp = Scaled::ZERO;
    if !c1.is_zero() {
        let (p, pp) = riccati(BesselKind::J, n, k, r)?;
        f = f + c1 * p;
        fp = fp + c1 * pp;
    }
    if !c2.is_zero() {
        let (q, qp) = riccati(BesselKind::Y, n, k, r)?;
        f = f + c2 * q;
        fp = fp + c2 * qp;
    }
    Ok(State { f, g: fp * a.inv() })
}

/// Coefficients `(c1, c2)` matching `state` at `r` (Wronskian `PQ' − P'Q = 1/k`).
fn bessel_coefficients(n: usize, k: Complex64, a: Complex64, state: &State, r: f64) -> Result<(Scaled, Scaled), MaxwellError> {
    let (p, pp) = riccati(BesselKind::J, n, k, r)?;
    let (q, qp) = riccati(BesselKind::Y, n, k, r)?;
    let ag = state.g * a;
    let kk = Scaled::from_c64(k);
    Ok(((state.f * qp - ag * q) * kk, (ag * p - state.f * pp) * kk))
}

impl Segment {
    pub fn contains(&self, r: f64) -> bool {
        r > self.lo && self.hi.is_none_or(|h| r <= h)
    }

    fn scale(&mut self, s: Scaled) {
        match &mut self.repr {
            SegmentRepr::Bessel { c1, c2, .. } => {
                *c1 = *c1 * s;
                *c2 = *c2 * s;
            }
            SegmentRepr::Hankel { c, .. } => *c = *c * s,
            SegmentRepr::Graded(t) => {
                for st in &mut t.states {
                    *st = st.times(s);
                }
            }
        }
    }
}

/// Radial solution of one `(n, polarization)` for a unit sheet amplitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialSolution {
    pub n: usize,
    pub pol: Polarization,
    pub omega: f64,
    pub source_radius: f64,
    /// Ordered from the origin outwards.
    pub segments: Vec<Segment>,
    /// `|det| / (|s_in| |s_out|)` of the matching system at the sheet.
    pub matching_sine: f64,
    #[serde(skip)]
    layers: Vec<Layer>,
    #[serde(skip)]
    control: Option<GradedControl>,
}

pub(crate) struct Integrator<'a> {
    layer: &'a Layer,
    lam2: f64,
    omega: f64,
    pol: Polarization,
    scheme: &'a Collocation,
    control: GradedControl,
}

impl Integrator<'_> {
    fn mat(&self, r: f64) -> [[Complex64; 2]; 2] {
        system(self.layer, r, self.lam2, self.omega, self.pol)
    }

    /// Step-size target at `r`.
    fn h_at(&self, r: f64) -> f64 {
        self.control.phase_step / local_rate(self.layer, r, self.lam2, self.omega, self.pol)
    }

    /// Grid from `from` to `to` (either direction), refined where the rate is high.
    fn grid(&self, from: f64, to: f64) -> Vec<f64> {
        let len = (to - from).abs();
        let mut pts = vec![from];
        let mut r = from;
        let dir = (to - from).signum();
        let hmax = len / self.control.min_steps as f64;
        while (to - r) * dir > 1e-14 * len {
            let h = self.h_at(r).min(hmax);
            let next = r + dir * h;
            r = if (to - next) * dir <= 0.25 * h { to } else { next };
            pts.push(r);
        }
        pts
    }

    fn advance(&self, state: &State, r0: f64, r1: f64) -> State {
        let (mut y, e) = state.split();
        let steps = ((r1 - r0).abs() / self.h_at(r0).min(self.h_at(r1))).ceil().max(1.0) as usize;
        let h = (r1 - r0) / steps as f64;
        for k in 0..steps {
            let phi = self.scheme.step(r0 + k as f64 * h, h, &|r| self.mat(r));
            y = [phi[0][0] * y[0] + phi[0][1] * y[1], phi[1][0] * y[0] + phi[1][1] * y[1]];
        }
        State::join(y, e)
    }

    fn track(&self, state: &State, from: f64, to: f64) -> GradedTrack {
        let grid = self.grid(from, to);
        let mut states = vec![*state];
        let mut cur = *state;
        for w in grid.windows(2) {
            let (mut y, e) = cur.split();
            let phi = self.scheme.step(w[0], w[1] - w[0], &|r| self.mat(r));
            y = [phi[0][0] * y[0] + phi[0][1] * y[1], phi[1][0] * y[0] + phi[1][1] * y[1]];
            cur = State::join(y, e);
            states.push(cur);
        }
        let mut nodes = grid;
        if to < from {
            nodes.reverse();
            states.reverse();
        }
        GradedTrack { nodes, states }
    }
}

impl RadialSolution {
    /// Solves the radial problem of degree `n` for the sheet at `rs`.
    pub fn solve(medium: &RadialMedium, n: usize, pol: Polarization, omega: f64, rs: f64, control: GradedControl, scheme: &Collocation) -> Result<Self, MaxwellError> {
        let lam2 = (n * (n + 1)) as f64;
        let layers = &medium.layers;
        let nl = layers.len();
        let is = medium.layer_index(rs);
        let integ = |i: usize| Integrator { layer: &layers[i], lam2, omega, pol, scheme, control };

        // regular solution, outwards to the sheet
        let mut inner = Vec::new();
        let mut state = State { f: Scaled::ZERO, g: Scaled::ZERO };
        for i in 0..=is {
            let lo = medium.inner_radius(i);
            let hi = layers[i].outer_radius.map_or(rs, |o| o.min(rs));
            let repr = if i == 0 {
                let (e, u) = layers[0].constant_isotropic().ok_or_else(|| MaxwellError::InvalidMedium("innermost layer must be constant".into()))?;
                let a = abc(&layers[0], 1.0, pol)[0];
                SegmentRepr::Bessel { k: wavenumber(e, u, omega), a, c1: Scaled::ONE, c2: Scaled::ZERO }
            } else if let Some((e, u)) = layers[i].constant_isotropic() {
                let k = wavenumber(e, u, omega);
                let a = abc(&layers[i], lo, pol)[0];
                let (c1, c2) = bessel_coefficients(n, k, a, &state, lo)?;
                SegmentRepr::Bessel { k, a, c1, c2 }
            } else {
                SegmentRepr::Graded(integ(i).track(&state, lo, hi))
            };
            let seg = Segment { lo, hi: Some(hi), layer: i, repr };
            state = eval_segment(&seg, layers, n, pol, omega, control, scheme, hi)?;
            inner.push(seg);
        }
        let s_in = state;

        // outgoing solution, inwards to the sheet
        let mut outer = Vec::new();
        {
            let last = nl - 1;
            let lo = medium.inner_radius(last).max(rs);
            let (e, u) = layers[last].constant_isotropic().ok_or_else(|| MaxwellError::InvalidMedium("outermost layer must be constant".into()))?;
            let a = abc(&layers[last], 1.0, pol)[0];
            let seg = Segment { lo, hi: None, layer: last, repr: SegmentRepr::Hankel { k: wavenumber(e, u, omega), a, c: Scaled::ONE } };
            state = eval_segment(&seg, layers, n, pol, omega, control, scheme, lo)?;
            outer.push(seg);
        }
        for i in (is..nl - 1).rev() {
            let hi = layers[i].outer_radius.expect("bounded");
            let lo = medium.inner_radius(i).max(rs);
            let repr = if let Some((e, u)) = layers[i].constant_isotropic() {
                let k = wavenumber(e, u, omega);
                let a = abc(&layers[i], hi, pol)[0];
                let (c1, c2) = bessel_coefficients(n, k, a, &state, hi)?;
                SegmentRepr::Bessel { k, a, c1, c2 }
            } else {
                SegmentRepr::Graded(integ(i).track(&state, hi, lo))
            };
            let seg = Segment { lo, hi: Some(hi), layer: i, repr };
            state = eval_segment_at_lo(&seg, layers, n, pol, omega, control, scheme)?;
            outer.push(seg);
        }
        let s_out = state;

        // w s_out − v s_in = d
        let d = match pol {
            Polarization::TE => [Scaled::ZERO, Scaled::from_c64(-I * omega * rs)],
            Polarization::TM => [Scaled::from_f64(-rs), Scaled::ZERO],
        };
        let det = s_in.f * s_out.g - s_out.f * s_in.g;
        let matching_sine = (det.ln_abs() - s_in.ln_norm() - s_out.ln_norm()).exp();
        if det.is_zero() || !matching_sine.is_finite() {
            return Err(MaxwellError::NearSingularMode { n, pol, sine: 0.0 });
        }
        let w = (s_in.f * d[1] - s_in.g * d[0]) / det;
        let v = (s_out.f * d[1] - s_out.g * d[0]) / det;
        for seg in &mut inner {
            seg.scale(v);
        }
        for seg in &mut outer {
            seg.scale(w);
        }
        outer.reverse();
        inner.extend(outer);
        Ok(RadialSolution { n, pol, omega, source_radius: rs, segments: inner, matching_sine, layers: layers.clone(), control: Some(control) })
    }

    /// Coefficient of `h_n(ωr)` in the exterior `f` (or `g`).
    pub fn exterior_coefficient(&self) -> Scaled {
        match &self.segments.last().expect("nonempty").repr {
            SegmentRepr::Hankel { c, .. } => *c,
            _ => unreachable!("last segment is outgoing"),
        }
    }

    /// `(F, G)` at `r > 0`; on a breakpoint the inner limit is used.
    pub fn state(&self, r: f64, scheme: &Collocation) -> Result<State, MaxwellError> {
        let seg = self.segments.iter().find(|s| s.contains(r)).ok_or(MaxwellError::BadPoint(r))?;
        eval_segment(seg, &self.layers, self.n, self.pol, self.omega, self.control.unwrap_or_default(), scheme, r)
    }

    pub fn layer(&self, i: usize) -> &Layer {
        &self.layers[i]
    }

    /// Index of the segment whose closure contains `r` from inside.
    pub fn segment_at(&self, r: f64) -> Option<&Segment> {
        self.segments.iter().find(|s| s.contains(r))
    }
}

#[allow(clippy::too_many_arguments)]
fn eval_segment(seg: &Segment, layers: &[Layer], n: usize, pol: Polarization, omega: f64, control: GradedControl, scheme: &Collocation, r: f64) -> Result<State, MaxwellError> {
    match &seg.repr {
        SegmentRepr::Bessel { k, a, c1, c2 } => bessel_state(n, *k, *a, *c1, *c2, r),
        SegmentRepr::Hankel { k, a, c } => {
            let (h, hp) = riccati(BesselKind::H1, n, *k, r)?;
            Ok(State { f: *c * h, g: *c * hp * a.inv() })
        }
        SegmentRepr::Graded(t) => {
            let lam2 = (n * (n + 1)) as f64;
            let integ = Integrator { layer: &layers[seg.layer], lam2, omega, pol, scheme, control };
            // nearest node at or below r
            let idx = match t.nodes.binary_search_by(|x| x.partial_cmp(&r).expect("finite")) {
                Ok(i) => return Ok(t.states[i]),
                Err(0) => 0,
                Err(i) => i - 1,
            };
            Ok(integ.advance(&t.states[idx], t.nodes[idx], r))
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn eval_segment_at_lo(seg: &Segment, layers: &[Layer], n: usize, pol: Polarization, omega: f64, control: GradedControl, scheme: &Collocation) -> Result<State, MaxwellError> {
    match &seg.repr {
        SegmentRepr::Graded(t) => Ok(t.states[0]),
        _ => eval_segment(seg, layers, n, pol, omega, control, scheme, seg.lo),
    }
}

/// Tangential/radial field components `(E_r, E_U, E_V)`, `(H_r, H_U, H_V)` of
/// one mode, from the state at `r`.
pub fn mode_fields(state: &State, layer: &Layer, n: usize, pol: Polarization, omega: f64, r: f64) -> ([Complex64; 3], [Complex64; 3]) {
    let lam = ((n * (n + 1)) as f64).sqrt();
    let [er, _, mr, _] = layer.eval(r);
    let f = state.f.to_c64();
    let g = state.g.to_c64();
    let iw = I * omega;
    let z = Complex64::new(0.0, 0.0);
    match pol {
        Polarization::TE => ([z, z, f / r], [-(f * lam) / (iw * mr * r * r), -g / (iw * r), z]),
        Polarization::TM => ([(f * lam) / (iw * er * r * r), g / (iw * r), z], [z, z, f / r]),
    }
}
