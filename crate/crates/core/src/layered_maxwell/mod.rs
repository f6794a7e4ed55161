//! Time-harmonic Maxwell equations (`e^{−iωt}`) in radially layered media,
//! solved mode by mode in vector spherical harmonics.
//!
//! The source is a tangential current sheet on `|x| = R_s` with finitely many
//! harmonics; modes decouple, so the modal expansion of the solution is exact
//! and has the same finite support as the source.

mod glue;
mod radial;

pub use glue::{
    curl_fd, maxwell_residual, reflect_solution, remove_localized_singularity, second_order_residual, FieldEvaluator, GluedField, GluingGeometry, GluingReport,
    Reflected,
};
pub use radial::{mode_fields, wavenumber, Collocation, GradedControl, GradedTrack, RadialSolution, Segment, SegmentRepr, State};

use crate::media::{Point, RadialMedium};
use crate::quad::gauss_legendre_on;
use crate::specfun::{ln_double_factorial, vsh, CVec3, Scaled, SpecfunError};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Polarization {
    /// `E` tangential of `V` type.
    TE,
    /// `H` tangential of `V` type.
    TM,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModeId {
    pub n: usize,
    pub m: i64,
    pub pol: Polarization,
}

impl ModeId {
    pub fn new(n: usize, m: i64, pol: Polarization) -> Result<Self, MaxwellError> {
        if n == 0 || m.unsigned_abs() as usize > n {
            return Err(MaxwellError::InvalidMode { n, m });
        }
        Ok(ModeId { n, m, pol })
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MaxwellError {
    #[error("mode (n={n}, m={m}) is not admissible")]
    InvalidMode { n: usize, m: i64 },
    #[error("near-singular mode n={n} {pol:?}: matching sine {sine:e}")]
    NearSingularMode { n: usize, pol: Polarization, sine: f64 },
    #[error("truncation insufficient: tail bound {tail:e} exceeds {threshold:e}")]
    TruncationInsufficient { tail: f64, threshold: f64 },
    #[error("invalid medium: {0}")]
    InvalidMedium(String),
    #[error("invalid source: {0}")]
    InvalidSource(String),
    #[error("cannot evaluate at r = {0}")]
    BadPoint(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Special(#[from] SpecfunError),
    #[error(transparent)]
    Media(#[from] crate::media::MediaError),
}

/// Tangential current sheet `J = Σ c_mode · (V or U) δ(|x| − R_s)`; TE modes
/// carry `V_n^m`, TM modes `U_n^m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceCurrentSource {
    pub radius: f64,
    pub amplitudes: Vec<(ModeId, Complex64)>,
}

impl SurfaceCurrentSource {
    pub fn new(radius: f64, amplitudes: Vec<(ModeId, Complex64)>) -> Result<Self, MaxwellError> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(MaxwellError::InvalidSource(format!("radius {radius}")));
        }
        let mut seen = std::collections::BTreeSet::new();
        for (id, _) in &amplitudes {
            ModeId::new(id.n, id.m, id.pol)?;
            if !seen.insert(*id) {
                return Err(MaxwellError::InvalidSource(format!("duplicate mode {id:?}")));
            }
        }
        Ok(SurfaceCurrentSource { radius, amplitudes })
    }

    /// Surface `L²` norm `R_s (Σ|c|²)^{1/2}`, the sheet analogue of `‖J‖_{L²}`.
    pub fn norm(&self) -> f64 {
        self.radius * self.amplitudes.iter().map(|(_, c)| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        SurfaceCurrentSource { radius: self.radius, amplitudes: self.amplitudes.iter().map(|(id, c)| (*id, c * s)).collect() }
    }

    /// The current density on the sheet at direction `dir`.
    pub fn density(&self, dir: &Point) -> Result<CVec3, MaxwellError> {
        let mut out = [Complex64::new(0.0, 0.0); 3];
        for (id, c) in &self.amplitudes {
            let t = vsh(id.n, id.m, dir)?;
            let b = match id.pol {
                Polarization::TE => t.rotated_tangent,
                Polarization::TM => t.gradient_tangent,
            };
            for i in 0..3 {
                out[i] += b[i] * c;
            }
        }
        Ok(out)
    }
}

/// What to do when a mode's matching system is nearly singular.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NearSingularPolicy {
    Abort,
    Report,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub graded: GradedControl,
    /// Matching sines below this are near-singular.
    pub singular_guard: f64,
    pub on_near_singular: NearSingularPolicy,
    /// Relative `Σ|c|²` of discarded source modes above which the solve fails.
    pub tail_threshold: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { graded: GradedControl::default(), singular_guard: 1e-14, on_near_singular: NearSingularPolicy::Abort, tail_threshold: 1e-12 }
    }
}

/// Per-region coefficients of one mode in the normalised Bessel basis:
/// `α₁ ĵ_n(kr) + α₂ ŷ_n(kr)` for `f` (TE) or `g` (TM); exterior: `c h_n(kr)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModalCoefficients {
    pub mode: ModeId,
    pub regions: Vec<RegionCoefficients>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegionCoefficients {
    Bessel { lo: f64, hi: f64, k: Complex64, alpha1: Scaled, alpha2: Scaled },
    Outgoing { lo: f64, k: Complex64, hankel: Scaled },
    Graded { lo: f64, hi: f64, nodes: usize },
}

/// A solved configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldSolution {
    pub medium: RadialMedium,
    pub source: SurfaceCurrentSource,
    pub omega: f64,
    pub n_max: usize,
    /// Radial solutions for unit amplitude, one per `(n, pol)` in the source, sorted.
    pub radials: Vec<RadialSolution>,
    /// Relative energy of source modes above `n_max`.
    pub tail_bound: f64,
    /// Modes whose matching system tripped the guard (policy `Report`).
    pub near_singular: Vec<(usize, Polarization, f64)>,
    #[serde(skip)]
    stages: usize,
}

fn scheme(stages: usize) -> Collocation {
    Collocation::new(stages.max(1))
}

/// Solves `∇×E = iωμH`, `∇×H = −iωεE + J` with the outgoing condition.
pub fn solve(medium: &RadialMedium, source: &SurfaceCurrentSource, omega: f64, n_max: usize) -> Result<FieldSolution, MaxwellError> {
    solve_with(medium, source, omega, n_max, &SolverOptions::default())
}

pub fn solve_with(medium: &RadialMedium, source: &SurfaceCurrentSource, omega: f64, n_max: usize, opts: &SolverOptions) -> Result<FieldSolution, MaxwellError> {
    medium.validate()?;
    if !(omega > 0.0) {
        return Err(MaxwellError::InvalidArgument(format!("omega = {omega} must be positive")));
    }
    if medium.breakpoints().iter().any(|b| (b - source.radius).abs() < 1e-12 * b) {
        return Err(MaxwellError::InvalidSource("sheet coincides with a breakpoint".into()));
    }
    let total: f64 = source.amplitudes.iter().map(|(_, c)| c.norm_sqr()).sum();
    let dropped: f64 = source.amplitudes.iter().filter(|(id, _)| id.n > n_max).map(|(_, c)| c.norm_sqr()).sum();
    let tail_bound = if total > 0.0 { dropped / total } else { 0.0 };
    if tail_bound > opts.tail_threshold {
        return Err(MaxwellError::TruncationInsufficient { tail: tail_bound, threshold: opts.tail_threshold });
    }
    let kept: Vec<(ModeId, Complex64)> = source.amplitudes.iter().filter(|(id, _)| id.n <= n_max).cloned().collect();
    let mut keys: Vec<(usize, Polarization)> = kept.iter().map(|(id, _)| (id.n, id.pol)).collect();
    keys.sort();
    keys.dedup();
    let sch = scheme(opts.graded.stages);
    let results: Vec<Result<RadialSolution, MaxwellError>> =
        keys.par_iter().map(|&(n, pol)| RadialSolution::solve(medium, n, pol, omega, source.radius, opts.graded, &sch)).collect();
    let mut radials = Vec::with_capacity(results.len());
    let mut near_singular = Vec::new();
    for r in results {
        let r = r?;
        if r.matching_sine < opts.singular_guard {
            match opts.on_near_singular {
                NearSingularPolicy::Abort => return Err(MaxwellError::NearSingularMode { n: r.n, pol: r.pol, sine: r.matching_sine }),
                NearSingularPolicy::Report => near_singular.push((r.n, r.pol, r.matching_sine)),
            }
        }
        radials.push(r);
    }
    Ok(FieldSolution {
        medium: medium.clone(),
        source: SurfaceCurrentSource { radius: source.radius, amplitudes: kept },
        omega,
        n_max,
        radials,
        tail_bound,
        near_singular,
        stages: opts.graded.stages,
    })
}

/// Per-mode radial components at one radius: `(E_r, E_U, E_V)`, `(H_r, H_U, H_V)`.
pub type ModeComponents = ([Complex64; 3], [Complex64; 3]);

impl FieldSolution {
    fn scheme(&self) -> Collocation {
        scheme(if self.stages == 0 { GradedControl::default().stages } else { self.stages })
    }

    pub fn radial(&self, n: usize, pol: Polarization) -> Option<&RadialSolution> {
        self.radials.iter().find(|r| r.n == n && r.pol == pol)
    }

    /// Components of every `(n, pol)` for unit amplitude at radius `r`.
    pub fn unit_components(&self, r: f64) -> Result<Vec<ModeComponents>, MaxwellError> {
        let sch = self.scheme();
        self.unit_components_with(r, &sch)
    }

    fn unit_components_with(&self, r: f64, sch: &Collocation) -> Result<Vec<ModeComponents>, MaxwellError> {
        if !(r > 0.0) {
            return Err(MaxwellError::BadPoint(r));
        }
        let layer = &self.medium.layers[self.medium.layer_index(r)];
        self.radials
            .iter()
            .map(|rad| {
                let st = rad.state(r, sch)?;
                Ok(mode_fields(&st, layer, rad.n, rad.pol, self.omega, r))
            })
            .collect()
    }

    fn radial_index(&self, n: usize, pol: Polarization) -> usize {
        self.radials.iter().position(|r| r.n == n && r.pol == pol).expect("every kept mode has a radial solution")
    }

    /// Scaled components of each source mode at radius `r`.
    pub fn mode_components(&self, r: f64) -> Result<Vec<(ModeId, ModeComponents)>, MaxwellError> {
        let unit = self.unit_components(r)?;
        Ok(self
            .source
            .amplitudes
            .iter()
            .map(|(id, c)| {
                let (e, h) = unit[self.radial_index(id.n, id.pol)];
                (*id, (e.map(|v| v * c), h.map(|v| v * c)))
            })
            .collect())
    }

    /// `(E, H)` at `x`; on a breakpoint the inner limit is used.
    pub fn eval_field(&self, x: &Point) -> Result<(CVec3, CVec3), MaxwellError> {
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        if !(r > 0.0) {
            return Err(MaxwellError::BadPoint(r));
        }
        let dir = [x[0] / r, x[1] / r, x[2] / r];
        let unit = self.unit_components(r)?;
        let z = Complex64::new(0.0, 0.0);
        let mut e = [z; 3];
        let mut h = [z; 3];
        for (id, c) in &self.source.amplitudes {
            let t = vsh(id.n, id.m, &dir)?;
            let (ue, uh) = unit[self.radial_index(id.n, id.pol)];
            for i in 0..3 {
                let basis = |v: &[Complex64; 3]| v[0] * t.radial[i] + v[1] * t.gradient_tangent[i] + v[2] * t.rotated_tangent[i];
                e[i] += basis(&ue) * c;
                h[i] += basis(&uh) * c;
            }
        }
        Ok((e, h))
    }

    /// Radii inside `(a, b)` where the radial functions are not smooth.
    fn kinks(&self, a: f64, b: f64) -> Vec<f64> {
        let mut pts: Vec<f64> = self.medium.breakpoints();
        pts.push(self.source.radius);
        pts.retain(|&p| p > a && p < b);
        pts
    }

    /// Panels needed on `(lo, hi)` to resolve oscillation (`ω|k|`) and algebraic growth (`n/r`).
    fn panel_count(&self, lo: f64, hi: f64) -> usize {
        let nmax = self.radials.iter().map(|r| r.n).max().unwrap_or(1) as f64;
        let mid = 0.5 * (lo + hi);
        let coef = self.medium.eval(mid).iter().map(|v| v.norm()).fold(1.0, f64::max);
        let rate = self.omega * coef + nmax / lo.max(1e-3);
        ((hi - lo) * rate / 4.0).ceil().clamp(2.0, 400.0) as usize
    }

    fn radial_rule(&self, a: f64, b: f64) -> Vec<(f64, f64)> {
        radial_rule_for(&[self], a, b)
    }

    /// Radial integral of `weight(r, E-comps, H-comps)` summed over source modes, `∫_a^b (…) r² dr`.
    fn modal_radial_integral<W>(&self, a: f64, b: f64, weight: W) -> Result<f64, MaxwellError>
    where
        W: Fn(f64, &[Complex64; 3], &[Complex64; 3]) -> f64 + Sync,
    {
        if !(a >= 0.0 && b > a) {
            return Err(MaxwellError::InvalidArgument(format!("annulus ({a}, {b})")));
        }
        let rule = self.radial_rule(a, b);
        let weights: Vec<f64> = self.radials.iter().map(|rad| self.source.amplitudes.iter().filter(|(id, _)| id.n == rad.n && id.pol == rad.pol).map(|(_, c)| c.norm_sqr()).sum()).collect();
        let sch = self.scheme();
        let parts: Vec<Result<f64, MaxwellError>> = rule
            .par_iter()
            .map(|&(r, w)| {
                let unit = self.unit_components_with(r, &sch)?;
                Ok(unit.iter().zip(&weights).map(|((e, h), c2)| c2 * weight(r, e, h)).sum::<f64>() * w * r * r)
            })
            .collect();
        let mut s = 0.0;
        for p in parts {
            s += p?;
        }
        Ok(s)
    }

    /// `‖(E, H)‖_{L²(B_b∖B_a)}` by VSH orthonormality and Gauss quadrature in `r`.
    pub fn l2_norm_annulus(&self, a: f64, b: f64) -> Result<f64, MaxwellError> {
        let sq = |_: f64, e: &[Complex64; 3], h: &[Complex64; 3]| e.iter().chain(h.iter()).map(|v| v.norm_sqr()).sum::<f64>();
        Ok(self.modal_radial_integral(a, b, sq)?.sqrt())
    }

    /// `Im 𝓘(H) = lim_R ω ∫_{∂B_R} |H|² = Σ |c|²/ω`, `c` the outgoing coefficient of `h_n(ωr)`.
    pub fn farfield_flux(&self) -> f64 {
        self.source
            .amplitudes
            .iter()
            .map(|(id, amp)| {
                let c = self.radials[self.radial_index(id.n, id.pol)].exterior_coefficient().to_c64() * amp;
                c.norm_sqr() / self.omega
            })
            .sum()
    }

    /// Surface-quadrature value of `ω ∫_{∂B_R} |H|²` (for checking [`Self::farfield_flux`]).
    pub fn sphere_flux(&self, radius: f64) -> Result<f64, MaxwellError> {
        let comps = self.mode_components(radius)?;
        let s: f64 = comps.iter().map(|(_, (_, h))| h.iter().map(|v| v.norm_sqr()).sum::<f64>()).sum();
        Ok(self.omega * s * radius * radius)
    }

    /// `∫ J·Ē` for the sheet: `R_s² Σ c · conj(E_comp(R_s))`.
    pub fn source_pairing(&self) -> Result<Complex64, MaxwellError> {
        let rs = self.source.radius;
        let comps = self.mode_components(rs)?;
        let mut s = Complex64::new(0.0, 0.0);
        for ((id, c), (_, (e, _))) in self.source.amplitudes.iter().zip(&comps) {
            let comp = match id.pol {
                Polarization::TE => e[2],
                Polarization::TM => e[1],
            };
            s += c * comp.conj();
        }
        Ok(s * rs * rs)
    }

    /// `ω² ∫ (Im ε |E|² + Im μ |H|²)` with spherical-frame components.
    pub fn absorbed_power(&self) -> Result<f64, MaxwellError> {
        let mut total = 0.0;
        for (i, layer) in self.medium.layers.iter().enumerate() {
            let lo = self.medium.inner_radius(i);
            let probe = |r: f64| layer.eval(r).iter().any(|v| v.im != 0.0);
            let Some(hi) = layer.outer_radius else {
                if probe(lo + 1.0) {
                    return Err(MaxwellError::InvalidMedium("lossy unbounded layer".into()));
                }
                continue;
            };
            if !probe(0.5 * (lo + hi)) && !probe(hi) {
                continue;
            }
            let w = |r: f64, e: &[Complex64; 3], h: &[Complex64; 3]| {
                let [er, et, mr, mt] = layer.eval(r);
                er.im * e[0].norm_sqr() + et.im * (e[1].norm_sqr() + e[2].norm_sqr()) + mr.im * h[0].norm_sqr() + mt.im * (h[1].norm_sqr() + h[2].norm_sqr())
            };
            total += self.modal_radial_integral(lo, hi, w)?;
        }
        Ok(self.omega * self.omega * total)
    }

    /// `Im ∫ iω J·Ē + Im 𝓘(H)`, which equals `−absorbed_power`.
    pub fn energy_balance(&self) -> Result<f64, MaxwellError> {
        let p = self.source_pairing()?;
        Ok((Complex64::new(0.0, self.omega) * p).im + self.farfield_flux())
    }

    /// `Data(J, δ) = (1/δ)|Im ∫ iωJ·Ē + Im 𝓘(H)| + ‖J‖²`.
    pub fn data_quantity(&self, delta: f64) -> Result<f64, MaxwellError> {
        if !(delta > 0.0) {
            return Err(MaxwellError::InvalidArgument("delta must be positive".into()));
        }
        Ok(self.energy_balance()?.abs() / delta + self.source.norm().powi(2))
    }

    /// `‖(E, H)‖²_{L²(a<r<b)} / Data(J, δ)`.
    pub fn energy_ratio(&self, delta: f64, a: f64, b: f64) -> Result<f64, MaxwellError> {
        Ok(self.l2_norm_annulus(a, b)?.powi(2) / self.data_quantity(delta)?)
    }

    /// Coefficients per source mode and region, normalised-Bessel convention.
    pub fn coefficients(&self) -> Vec<ModalCoefficients> {
        self.source
            .amplitudes
            .iter()
            .map(|(id, amp)| {
                let rad = &self.radials[self.radial_index(id.n, id.pol)];
                let n = id.n as i64;
                let jfac = Scaled::from_c64_ln(Complex64::new(1.0, 0.0), -ln_double_factorial(2 * n + 1));
                let yfac = Scaled::from_c64_ln(Complex64::new(-1.0, 0.0), ln_double_factorial(2 * n - 1));
                let a = Scaled::from_c64(*amp);
                let regions = rad
                    .segments
                    .iter()
                    .map(|s| match &s.repr {
                        // F = r f, so f = c1 j_n + c2 y_n = (c1/(2n+1)!!) ĵ_n − c2 (2n−1)!! ŷ_n
                        SegmentRepr::Bessel { k, c1, c2, .. } => {
                            RegionCoefficients::Bessel { lo: s.lo, hi: s.hi.unwrap_or(f64::INFINITY), k: *k, alpha1: *c1 * jfac * a, alpha2: *c2 * yfac * a }
                        }
                        SegmentRepr::Hankel { k, c, .. } => RegionCoefficients::Outgoing { lo: s.lo, k: *k, hankel: *c * a },
                        SegmentRepr::Graded(t) => RegionCoefficients::Graded { lo: s.lo, hi: s.hi.unwrap_or(f64::INFINITY), nodes: t.nodes.len() },
                    })
                    .collect();
                ModalCoefficients { mode: *id, regions }
            })
            .collect()
    }

    /// JSON export: medium, source, coefficient tables and metadata.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "omega": self.omega,
            "n_max": self.n_max,
            "tail_bound": self.tail_bound,
            "medium": self.medium,
            "source": self.source,
            "coefficients": self.coefficients(),
            "near_singular": self.near_singular,
        })
    }

    /// CSV field scan: `x,y,z` then real/imaginary parts of `E` and `H`.
    pub fn write_field_csv<W: Write>(&self, points: &[Point], out: W) -> Result<(), Box<dyn std::error::Error>> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "x", "y", "z", "re_ex", "im_ex", "re_ey", "im_ey", "re_ez", "im_ez", "re_hx", "im_hx", "re_hy", "im_hy", "re_hz", "im_hz",
        ])?;
        for p in points {
            let (e, h) = self.eval_field(p)?;
            let mut rec = vec![p[0], p[1], p[2]];
            for v in e.iter().chain(h.iter()) {
                rec.push(v.re);
                rec.push(v.im);
            }
            w.write_record(rec.iter().map(|v| format!("{v:.17e}")))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `‖(E₁, H₁) − (E₂, H₂)‖_{L²(a<r<b)}` for two solutions driven by the same source.
pub fn l2_difference_annulus(s1: &FieldSolution, s2: &FieldSolution, a: f64, b: f64) -> Result<f64, MaxwellError> {
    if s1.source != s2.source || s1.omega != s2.omega {
        return Err(MaxwellError::InvalidArgument("solutions must share source and frequency".into()));
    }
    let rule = radial_rule_for(&[s1, s2], a, b);
    let sch1 = s1.scheme();
    let sch2 = s2.scheme();
    let weights: Vec<f64> = s1.radials.iter().map(|rad| s1.source.amplitudes.iter().filter(|(id, _)| id.n == rad.n && id.pol == rad.pol).map(|(_, c)| c.norm_sqr()).sum()).collect();
    let parts: Vec<Result<f64, MaxwellError>> = rule
        .par_iter()
        .map(|&(r, w)| {
            let u1 = s1.unit_components_with(r, &sch1)?;
            let u2 = s2.unit_components_with(r, &sch2)?;
            let mut acc = 0.0;
            for ((a1, a2), c2) in u1.iter().zip(&u2).zip(&weights) {
                let d: f64 = (0..3).map(|i| (a1.0[i] - a2.0[i]).norm_sqr() + (a1.1[i] - a2.1[i]).norm_sqr()).sum();
                acc += c2 * d;
            }
            Ok(acc * w * r * r)
        })
        .collect();
    let mut s = 0.0;
    for p in parts {
        s += p?;
    }
    Ok(s.sqrt())
}

/// Composite Gauss rule on `(a, b)` split at the kinks of every solution.
fn radial_rule_for(sols: &[&FieldSolution], a: f64, b: f64) -> Vec<(f64, f64)> {
    let mut pts = vec![a, b];
    for s in sols {
        pts.extend(s.kinks(a, b));
    }
    pts.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
    pts.dedup_by(|x, y| (*x - *y).abs() < 1e-14 * y.abs().max(1.0));
    let mut rule = Vec::new();
    for w in pts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let panels = sols.iter().map(|s| s.panel_count(lo, hi)).max().unwrap_or(2);
        let len = (hi - lo) / panels as f64;
        for p in 0..panels {
            rule.extend(gauss_legendre_on(16, lo + p as f64 * len, lo + (p + 1) as f64 * len));
        }
    }
    rule
}

#[cfg(test)]
mod tests;
