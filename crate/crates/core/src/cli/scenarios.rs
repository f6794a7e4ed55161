//! The eight scenarios: parameter schemas, validation and execution.

use super::{num, Assertion, CliError, Report, Table};
use crate::carleman::{
    build_frame, carleman_inequality_check, exponent_bookkeeping, hypothesis_constant, n0, pushed_matrix, verify_structural_claims, ConstantTensor,
    OscillatingMedium, QuadratureSpec, RadialBump, ShellDomain, TensorField, WeightParams,
};
use crate::layered_maxwell::{
    l2_difference_annulus, remove_localized_singularity, solve_with, FieldSolution, GluingGeometry, ModeId, NearSingularPolicy, Polarization,
    SolverOptions, SurfaceCurrentSource,
};
use crate::media::{dcm_maps, dcm_reference, make_cm_cloak, make_dcm_example, make_superlens, Layer, Mat3, Point, ProfilePiece, Provenance, RadialMedium};
use crate::three_sphere::{
    check_hadamard, helmholtz_constant, maxwell_constant, random_holomorphic, random_maxwell_field, single_mode_trace_ratio, check_maxwell_3sphere, Dim,
    HarmonicExpansion2D, HelmholtzExpansion, HelmholtzTerm, MaxwellModalField, MaxwellTerm, TraceNorm,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SCENARIOS: [(&str, &str); 8] = [
    ("dcm_convergence", "doubly complementary shell: O(δ) convergence to the limiting field outside B_{r3}"),
    ("blowup_scan", "doubly complementary shell with the source inside B_{r3}: shell blow-up vs bounded exterior"),
    ("superlens", "superlens: convergence to the magnified reference outside B_{r3}"),
    ("cm_cloak", "cloaking by complementary media: exterior field vs free space and vs the bare object"),
    ("three_sphere_suite", "Hadamard three-circle checks and full-data Helmholtz three-sphere constants"),
    ("maxwell_3sphere_suite", "Maxwell three-sphere constants for random modal fields and single modes"),
    ("carleman_suite", "conformal-frame exactness, structural claims, Carleman inequality, exponent bookkeeping"),
    ("gluing_demo", "removing the localized singularity: interface jumps and interior residual"),
];

/// A validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub enum Scenario {
    DcmConvergence(DcmParams),
    BlowupScan(BlowupParams),
    Superlens(SuperlensParams),
    CmCloak(CloakParams),
    ThreeSphereSuite(ThreeSphereParams),
    Maxwell3SphereSuite(Maxwell3Params),
    CarlemanSuite(CarlemanParams),
    GluingDemo(GluingParams),
}

fn parse<P: DeserializeOwned + Validate>(v: &Value) -> Result<P, CliError> {
    let p: P = serde_json::from_value(v.clone()).map_err(|e| CliError::Config(format!("parameters: {e}")))?;
    p.validate()?;
    Ok(p)
}

impl Scenario {
    pub fn parse(name: &str, parameters: &Value) -> Result<Self, CliError> {
        Ok(match name {
            "dcm_convergence" => Scenario::DcmConvergence(parse(parameters)?),
            "blowup_scan" => Scenario::BlowupScan(parse(parameters)?),
            "superlens" => Scenario::Superlens(parse(parameters)?),
            "cm_cloak" => Scenario::CmCloak(parse(parameters)?),
            "three_sphere_suite" => Scenario::ThreeSphereSuite(parse(parameters)?),
            "maxwell_3sphere_suite" => Scenario::Maxwell3SphereSuite(parse(parameters)?),
            "carleman_suite" => Scenario::CarlemanSuite(parse(parameters)?),
            "gluing_demo" => Scenario::GluingDemo(parse(parameters)?),
            other => {
                let known: Vec<&str> = SCENARIOS.iter().map(|s| s.0).collect();
                return Err(CliError::Config(format!("unknown scenario `{other}` (known: {})", known.join(", "))));
            }
        })
    }

    /// The resolved parameters, defaults filled in.
    pub fn parameters_json(&self) -> Value {
        let v = match self {
            Scenario::DcmConvergence(p) => serde_json::to_value(p),
            Scenario::BlowupScan(p) => serde_json::to_value(p),
            Scenario::Superlens(p) => serde_json::to_value(p),
            Scenario::CmCloak(p) => serde_json::to_value(p),
            Scenario::ThreeSphereSuite(p) => serde_json::to_value(p),
            Scenario::Maxwell3SphereSuite(p) => serde_json::to_value(p),
            Scenario::CarlemanSuite(p) => serde_json::to_value(p),
            Scenario::GluingDemo(p) => serde_json::to_value(p),
        };
        v.expect("parameters serialise")
    }

    pub fn execute(&self, seed: u64) -> Result<Report, CliError> {
        match self {
            Scenario::DcmConvergence(p) => run_dcm_convergence(p, seed),
            Scenario::BlowupScan(p) => run_blowup_scan(p, seed),
            Scenario::Superlens(p) => run_superlens(p, seed),
            Scenario::CmCloak(p) => run_cm_cloak(p, seed),
            Scenario::ThreeSphereSuite(p) => run_three_sphere_suite(p, seed),
            Scenario::Maxwell3SphereSuite(p) => run_maxwell_3sphere_suite(p, seed),
            Scenario::CarlemanSuite(p) => run_carleman_suite(p, seed),
            Scenario::GluingDemo(p) => run_gluing_demo(p, seed),
        }
    }
}

pub trait Validate {
    fn validate(&self) -> Result<(), CliError>;
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn increasing(what: &str, xs: &[f64]) -> Result<(), CliError> {
    if xs.iter().any(|x| !x.is_finite()) || xs.first().is_some_and(|x| *x <= 0.0) || xs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(bad(format!("{what} must be positive and strictly increasing, got {xs:?}")));
    }
    Ok(())
}

fn deltas_ok(deltas: &[f64], min_len: usize) -> Result<(), CliError> {
    if deltas.len() < min_len || deltas.iter().any(|d| !(*d > 0.0 && d.is_finite())) {
        return Err(bad(format!("deltas must hold at least {min_len} strictly positive values, got {deltas:?}")));
    }
    Ok(())
}

fn positive(what: &str, x: f64) -> Result<(), CliError> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(bad(format!("{what} must be positive, got {x}")));
    }
    Ok(())
}

/// Least-squares `(slope, intercept)` of `ln y` against `ln x`.
pub fn loglog_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let pts: Vec<(f64, f64)> = xs.iter().zip(ys).map(|(x, y)| (x.ln(), y.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// `max / min` of a positive sample.
pub fn spread(xs: &[f64]) -> f64 {
    let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    hi / lo
}

// ---------------------------------------------------------------------------
// shared pieces of the Maxwell scenarios

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeAmplitude {
    pub n: usize,
    pub m: i64,
    pub pol: Polarization,
    pub amplitude: Complex64,
}

/// Surface-current sheet at `radius`. Without an explicit `modes` list every
/// `(n, m, pol)` with `n ≤ max_degree` gets an amplitude uniform in the unit
/// square, drawn from the run seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SourceSpec {
    pub radius: f64,
    pub max_degree: usize,
    pub modes: Option<Vec<ModeAmplitude>>,
}

impl SourceSpec {
    fn with_radius(radius: f64) -> Self {
        SourceSpec { radius, max_degree: 6, modes: None }
    }

    fn validate(&self) -> Result<(), CliError> {
        positive("source.radius", self.radius)?;
        if self.modes.is_none() && self.max_degree == 0 {
            return Err(bad("source.max_degree must be at least 1"));
        }
        Ok(())
    }

    pub fn build(&self, seed: u64) -> Result<SurfaceCurrentSource, CliError> {
        let amplitudes = match &self.modes {
            Some(list) => list.iter().map(|a| Ok((ModeId::new(a.n, a.m, a.pol)?, a.amplitude))).collect::<Result<Vec<_>, CliError>>()?,
            None => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut out = Vec::new();
                for n in 1..=self.max_degree {
                    for m in -(n as i64)..=(n as i64) {
                        for pol in [Polarization::TE, Polarization::TM] {
                            let c = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                            out.push((ModeId::new(n, m, pol)?, c));
                        }
                    }
                }
                out
            }
        };
        Ok(SurfaceCurrentSource::new(self.radius, amplitudes)?)
    }

    fn degree(&self) -> usize {
        match &self.modes {
            Some(list) => list.iter().map(|a| a.n).max().unwrap_or(1),
            None => self.max_degree,
        }
    }
}

impl Default for SourceSpec {
    fn default() -> Self {
        Self::with_radius(5.0)
    }
}

/// Near-singular policy and how many flagged modes a run may accumulate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Numerics {
    pub on_near_singular: NearSingularPolicy,
    pub near_singular_budget: usize,
}

impl Default for Numerics {
    fn default() -> Self {
        Numerics { on_near_singular: NearSingularPolicy::Abort, near_singular_budget: 0 }
    }
}

struct Solver {
    omega: f64,
    n_max: usize,
    opts: SolverOptions,
    budget: usize,
    flagged: usize,
}

impl Solver {
    fn new(omega: f64, n_max: usize, numerics: Numerics) -> Self {
        Solver { omega, n_max, opts: SolverOptions { on_near_singular: numerics.on_near_singular, ..Default::default() }, budget: numerics.near_singular_budget, flagged: 0 }
    }

    fn solve(&mut self, medium: &RadialMedium, source: &SurfaceCurrentSource) -> Result<FieldSolution, CliError> {
        let sol = solve_with(medium, source, self.omega, self.n_max, &self.opts)?;
        self.flagged += sol.near_singular.len();
        if self.flagged > self.budget {
            return Err(CliError::Numerical(format!("{} near-singular modes exceed the budget of {}", self.flagged, self.budget)));
        }
        Ok(sol)
    }
}

fn dcm_r3(r1: f64, r2: f64, p: f64) -> f64 {
    r2.powf(p) / r1.powf(p - 1.0)
}

fn check_dcm_geometry(r1: f64, r2: f64, p: f64, omega: f64) -> Result<f64, CliError> {
    increasing("(r1, r2)", &[r1, r2])?;
    if !(p > 1.0 && p.is_finite()) {
        return Err(bad(format!("p must exceed 1, got {p}")));
    }
    positive("omega", omega)?;
    Ok(dcm_r3(r1, r2, p))
}

fn annulus_or(annulus: Option<[f64; 2]>, r3: f64) -> [f64; 2] {
    annulus.unwrap_or([r3, r3 + 2.0])
}

fn check_exterior(annulus: [f64; 2], r3: f64, source: &SourceSpec) -> Result<(), CliError> {
    increasing("annulus", &annulus)?;
    if annulus[0] < r3 * (1.0 - 1e-12) {
        return Err(bad(format!("annulus {annulus:?} must lie outside r3 = {r3}")));
    }
    if source.radius <= r3 {
        return Err(bad(format!("source radius {} must exceed r3 = {r3}", source.radius)));
    }
    Ok(())
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DcmParams {
    pub r1: f64,
    pub r2: f64,
    pub p: f64,
    pub omega: f64,
    pub deltas: Vec<f64>,
    pub source: SourceSpec,
    /// Default: the source degree.
    pub n_max: Option<usize>,
    /// Default: `[r3, r3 + 2]`.
    pub annulus: Option<[f64; 2]>,
    pub slope_window: Option<[f64; 2]>,
    pub max_exterior_variation: Option<f64>,
    pub numerics: Numerics,
}

impl Default for DcmParams {
    fn default() -> Self {
        DcmParams {
            r1: 1.0,
            r2: 2.0,
            p: 2.0,
            omega: 1.0,
            deltas: vec![1e-2, 1e-3, 1e-4, 1e-5],
            source: SourceSpec::with_radius(5.0),
            n_max: None,
            annulus: None,
            slope_window: Some([0.85, 1.15]),
            max_exterior_variation: Some(0.1),
            numerics: Numerics::default(),
        }
    }
}

impl Validate for DcmParams {
    fn validate(&self) -> Result<(), CliError> {
        let r3 = check_dcm_geometry(self.r1, self.r2, self.p, self.omega)?;
        deltas_ok(&self.deltas, 2)?;
        self.source.validate()?;
        check_exterior(annulus_or(self.annulus, r3), r3, &self.source)
    }
}

pub fn run_dcm_convergence(p: &DcmParams, seed: u64) -> Result<Report, CliError> {
    let mut report = Report::new("dcm_convergence");
    let r3 = dcm_r3(p.r1, p.r2, p.p);
    let [a, b] = annulus_or(p.annulus, r3);
    let source = p.source.build(seed)?;
    let jn = source.norm();
    let mut solver = Solver::new(p.omega, p.n_max.unwrap_or(p.source.degree()), p.numerics);
    let reference = solver.solve(&dcm_reference(&make_dcm_example(p.r1, p.r2, p.p, 0.0)?)?, &source)?;
    let mut table = Table::new("dcm_convergence", &["delta", "error", "error_over_j", "exterior_norm", "exterior_over_j"]);
    let (mut errs, mut exts) = (Vec::new(), Vec::new());
    for &d in &p.deltas {
        let sol = solver.solve(&make_dcm_example(p.r1, p.r2, p.p, d)?, &source)?;
        let err = l2_difference_annulus(&sol, &reference, a, b)?;
        let ext = sol.l2_norm_annulus(a, b)?;
        table.push(vec![num(d), num(err), num(err / jn), num(ext), num(ext / jn)]);
        errs.push(err);
        exts.push(ext / jn);
    }
    let (slope, intercept) = loglog_fit(&p.deltas, &errs);
    let variation = spread(&exts) - 1.0;
    let fitted_c = p.deltas.iter().zip(&errs).map(|(d, e)| e / (d * jn)).fold(0.0, f64::max);
    report.metric("slope", slope);
    report.metric("intercept", intercept);
    report.metric("fitted_c", fitted_c);
    report.metric("exterior_sup_over_j", exts.iter().cloned().fold(0.0, f64::max));
    report.metric("exterior_variation", variation);
    report.metric("source_norm", jn);
    report.metric("r3", r3);
    if let Some([lo, hi]) = p.slope_window {
        report.assertions.push(Assertion::new("slope_in_window", (lo..=hi).contains(&slope), slope, format!("in [{lo}, {hi}]")));
    }
    if let Some(tol) = p.max_exterior_variation {
        report.assertions.push(Assertion::new("exterior_norm_stable", variation < tol, variation, format!("< {tol}")));
    }
    report.tables.push(table);
    Ok(report)
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlowupParams {
    pub r1: f64,
    pub r2: f64,
    pub p: f64,
    pub omega: f64,
    pub deltas: Vec<f64>,
    pub source: SourceSpec,
    pub n_max: Option<usize>,
    /// Exterior annulus; default `[r3, r3 + 2]`.
    pub exterior: Option<[f64; 2]>,
    pub max_exterior_over_j: Option<f64>,
    pub numerics: Numerics,
}

impl Default for BlowupParams {
    fn default() -> Self {
        BlowupParams {
            r1: 1.0,
            r2: 2.0,
            p: 2.0,
            omega: 1.0,
            deltas: vec![1e-1, 1e-2, 1e-3, 1e-4, 1e-5],
            source: SourceSpec::with_radius(3.0),
            n_max: None,
            exterior: None,
            max_exterior_over_j: None,
            numerics: Numerics::default(),
        }
    }
}

impl Validate for BlowupParams {
    fn validate(&self) -> Result<(), CliError> {
        let r3 = check_dcm_geometry(self.r1, self.r2, self.p, self.omega)?;
        deltas_ok(&self.deltas, 2)?;
        self.source.validate()?;
        if self.source.radius <= self.r2 || (self.source.radius - r3).abs() < 1e-12 * r3 {
            return Err(bad(format!("source radius {} must exceed r2 = {} and differ from r3 = {r3}", self.source.radius, self.r2)));
        }
        let ext = annulus_or(self.exterior, r3);
        increasing("exterior", &ext)?;
        if ext[0] < r3 * (1.0 - 1e-12) {
            return Err(bad(format!("exterior {ext:?} must lie outside r3 = {r3}")));
        }
        Ok(())
    }
}

pub fn run_blowup_scan(p: &BlowupParams, seed: u64) -> Result<Report, CliError> {
    let mut report = Report::new("blowup_scan");
    let r3 = dcm_r3(p.r1, p.r2, p.p);
    let [a, b] = annulus_or(p.exterior, r3);
    let source = p.source.build(seed)?;
    let jn = source.norm();
    let mut solver = Solver::new(p.omega, p.n_max.unwrap_or(p.source.degree()), p.numerics);
    let mut table = Table::new("blowup_scan", &["delta", "shell_norm", "shell_over_j", "middle_norm", "exterior_norm", "exterior_over_j"]);
    let (mut shells, mut exts) = (Vec::new(), Vec::new());
    for &d in &p.deltas {
        let sol = solver.solve(&make_dcm_example(p.r1, p.r2, p.p, d)?, &source)?;
        let shell = sol.l2_norm_annulus(p.r1, p.r2)?;
        let middle = sol.l2_norm_annulus(p.r2, r3)?;
        let ext = sol.l2_norm_annulus(a, b)?;
        table.push(vec![num(d), num(shell), num(shell / jn), num(middle), num(ext), num(ext / jn)]);
        shells.push(shell);
        exts.push(ext / jn);
    }
    let (slope, _) = loglog_fit(&p.deltas, &shells);
    let sup = exts.iter().cloned().fold(0.0, f64::max);
    report.metric("growth_exponent", -slope);
    report.metric("exterior_sup_over_j", sup);
    report.metric("exterior_variation", spread(&exts) - 1.0);
    report.metric("r3", r3);
    report.notes.push("shell norm ~ δ^(-growth_exponent); the exponent is reported, not asserted".into());
    if let Some(max) = p.max_exterior_over_j {
        report.assertions.push(Assertion::new("exterior_bounded", sup <= max, sup, format!("<= {max}")));
    }
    report.tables.push(table);
    Ok(report)
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuperlensParams {
    pub r0: f64,
    pub m: f64,
    pub r1: f64,
    pub object_eps: Complex64,
    pub object_mu: Complex64,
    pub omega: f64,
    pub deltas: Vec<f64>,
    pub source: SourceSpec,
    pub n_max: Option<usize>,
    pub annulus: Option<[f64; 2]>,
    pub require_monotone: bool,
    /// Bound on `err(min δ) / err(max δ)`.
    pub max_error_ratio: Option<f64>,
    pub numerics: Numerics,
}

impl Default for SuperlensParams {
    fn default() -> Self {
        SuperlensParams {
            r0: 0.5,
            m: 4.0,
            r1: 1.0,
            object_eps: Complex64::new(2.0, 0.0),
            object_mu: Complex64::new(2.0, 0.0),
            omega: 1.0,
            deltas: vec![1e-2, 1e-3, 1e-4, 1e-5],
            source: SourceSpec::with_radius(5.0),
            n_max: None,
            annulus: None,
            require_monotone: true,
            max_error_ratio: Some(1e-2),
            numerics: Numerics::default(),
        }
    }
}

impl SuperlensParams {
    fn r3(&self) -> f64 {
        (self.m * self.r0).powi(2) / self.r1
    }
}

impl Validate for SuperlensParams {
    fn validate(&self) -> Result<(), CliError> {
        positive("r0", self.r0)?;
        positive("omega", self.omega)?;
        if !(self.m > 1.0) {
            return Err(bad(format!("m must exceed 1, got {}", self.m)));
        }
        increasing("(r0, r1, m r0)", &[self.r0, self.r1, self.m * self.r0])?;
        deltas_ok(&self.deltas, 2)?;
        self.source.validate()?;
        check_exterior(annulus_or(self.annulus, self.r3()), self.r3(), &self.source)
    }
}

pub fn run_superlens(p: &SuperlensParams, seed: u64) -> Result<Report, CliError> {
    let mut report = Report::new("superlens");
    let r3 = p.r3();
    let [a, b] = annulus_or(p.annulus, r3);
    let source = p.source.build(seed)?;
    let mut solver = Solver::new(p.omega, p.n_max.unwrap_or(p.source.degree()), p.numerics);
    let object = (p.object_eps, p.object_mu);
    let reference = solver.solve(&make_superlens(p.r0, p.m, p.r1, object, 0.0)?.reference, &source)?;
    let mut table = Table::new("superlens", &["delta", "error", "error_over_j"]);
    // sorted by decreasing δ so that "monotone" reads along the table
    let mut deltas = p.deltas.clone();
    deltas.sort_by(|x, y| y.total_cmp(x));
    let mut errs = Vec::new();
    for &d in &deltas {
        let sol = solver.solve(&make_superlens(p.r0, p.m, p.r1, object, d)?.medium, &source)?;
        let err = l2_difference_annulus(&sol, &reference, a, b)?;
        table.push(vec![num(d), num(err), num(err / source.norm())]);
        errs.push(err);
    }
    let monotone = errs.windows(2).all(|w| w[1] < w[0]);
    let ratio = errs[errs.len() - 1] / errs[0];
    let (slope, _) = loglog_fit(&deltas, &errs);
    report.metric("error_ratio", ratio);
    report.metric("slope", slope);
    report.metric("r3", r3);
    if p.require_monotone {
        report.assertions.push(Assertion::new("error_monotone_in_delta", monotone, if monotone { 1.0 } else { 0.0 }, "strictly decreasing as δ decreases"));
    }
    if let Some(max) = p.max_error_ratio {
        report.assertions.push(Assertion::new("error_ratio", ratio < max, ratio, format!("< {max}")));
    }
    report.tables.push(table);
    Ok(report)
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CloakParams {
    pub r2: f64,
    pub r3: f64,
    pub profile: Vec<ProfilePiece>,
    pub omega: f64,
    pub deltas: Vec<f64>,
    pub source: SourceSpec,
    pub n_max: Option<usize>,
    pub annulus: Option<[f64; 2]>,
    /// Smallest acceptable log-log slope of the error against free space.
    pub min_slope_free: Option<f64>,
    pub numerics: Numerics,
}

impl Default for CloakParams {
    fn default() -> Self {
        CloakParams {
            r2: 1.0,
            r3: 4.0,
            profile: vec![ProfilePiece { inner: 1.0, outer: 2.0, eps: Complex64::new(3.0, 0.0), mu: Complex64::new(2.0, 0.0) }],
            omega: 1.0,
            deltas: vec![1e-2, 1e-3, 1e-4, 1e-5],
            source: SourceSpec::with_radius(5.0),
            n_max: None,
            annulus: None,
            min_slope_free: None,
            numerics: Numerics::default(),
        }
    }
}

impl Validate for CloakParams {
    fn validate(&self) -> Result<(), CliError> {
        increasing("(r2, r3)", &[self.r2, self.r3])?;
        positive("omega", self.omega)?;
        deltas_ok(&self.deltas, 2)?;
        self.source.validate()?;
        for piece in &self.profile {
            if !(self.r2 <= piece.inner && piece.inner < piece.outer && piece.outer <= self.r3) {
                return Err(bad(format!("profile piece ({}, {}) must lie in [r2, r3] = [{}, {}]", piece.inner, piece.outer, self.r2, self.r3)));
            }
        }
        check_exterior(annulus_or(self.annulus, self.r3), self.r3, &self.source)
    }
}

/// The bare object: the profile pieces in vacuum.
fn object_medium(profile: &[ProfilePiece]) -> Result<RadialMedium, CliError> {
    let one = Complex64::new(1.0, 0.0);
    let mut pieces = profile.to_vec();
    pieces.sort_by(|a, b| a.inner.total_cmp(&b.inner));
    let mut layers = Vec::new();
    let mut at = 0.0;
    for p in &pieces {
        if p.inner > at {
            layers.push(Layer::constant(Some(p.inner), one, one));
        }
        layers.push(Layer::constant(Some(p.outer), p.eps, p.mu));
        at = p.outer;
    }
    layers.push(Layer::constant(None, one, one));
    Ok(RadialMedium::new(layers, Provenance { constructor: "bare_object".into(), ..Default::default() })?)
}

pub fn run_cm_cloak(p: &CloakParams, seed: u64) -> Result<Report, CliError> {
    let mut report = Report::new("cm_cloak");
    let [a, b] = annulus_or(p.annulus, p.r3);
    let source = p.source.build(seed)?;
    let mut solver = Solver::new(p.omega, p.n_max.unwrap_or(p.source.degree()), p.numerics);
    let free = solver.solve(&RadialMedium::vacuum(), &source)?;
    let bare = solver.solve(&object_medium(&p.profile)?, &source)?;
    let mut table = Table::new("cm_cloak", &["delta", "error_free", "error_object"]);
    let (mut ef, mut eo) = (Vec::new(), Vec::new());
    for &d in &p.deltas {
        let sol = solver.solve(&make_cm_cloak(p.r2, p.r3, &p.profile, d)?, &source)?;
        let f = l2_difference_annulus(&sol, &free, a, b)?;
        let o = l2_difference_annulus(&sol, &bare, a, b)?;
        table.push(vec![num(d), num(f), num(o)]);
        ef.push(f);
        eo.push(o);
    }
    let (slope_free, _) = loglog_fit(&p.deltas, &ef);
    let (slope_object, _) = loglog_fit(&p.deltas, &eo);
    report.metric("slope_free", slope_free);
    report.metric("slope_object", slope_object);
    // how visible the bare object would be without the cloak
    report.metric("object_visibility", l2_difference_annulus(&bare, &free, a, b)?);
    report.notes.push("error_free -> 0 means the object is cloaked for an exterior observer".into());
    if let Some(min) = p.min_slope_free {
        report.assertions.push(Assertion::new("cloaking_rate", slope_free >= min, slope_free, format!(">= {min}")));
    }
    report.tables.push(table);
    Ok(report)
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThreeSphereParams {
    pub polynomials: usize,
    pub max_degree: usize,
    pub radii_grid: Vec<f64>,
    pub monomial_max_degree: usize,
    pub random_tolerance: Option<f64>,
    pub monomial_tolerance: Option<f64>,
    pub helmholtz_members: usize,
    pub helmholtz_omega: f64,
    pub helmholtz_max_degree: usize,
}

impl Default for ThreeSphereParams {
    fn default() -> Self {
        ThreeSphereParams {
            polynomials: 1000,
            max_degree: 20,
            radii_grid: vec![0.5, 0.8, 1.0, 1.4, 2.0],
            monomial_max_degree: 50,
            random_tolerance: Some(1e-10),
            monomial_tolerance: Some(1e-12),
            helmholtz_members: 20,
            helmholtz_omega: 1.0,
            helmholtz_max_degree: 6,
        }
    }
}

impl Validate for ThreeSphereParams {
    fn validate(&self) -> Result<(), CliError> {
        increasing("radii_grid", &self.radii_grid)?;
        if self.radii_grid.len() < 3 {
            return Err(bad("radii_grid needs at least 3 radii"));
        }
        if self.polynomials == 0 || self.max_degree == 0 {
            return Err(bad("polynomials and max_degree must be positive"));
        }
        if !(self.helmholtz_omega >= 0.0) {
            return Err(bad("helmholtz_omega must be >= 0"));
        }
        Ok(())
    }
}

fn triples(grid: &[f64]) -> Vec<(f64, f64, f64)> {
    let mut out = Vec::new();
    for i in 0..grid.len() {
        for j in i + 1..grid.len() {
            for k in j + 1..grid.len() {
                out.push((grid[i], grid[j], grid[k]));
            }
        }
    }
    out
}

pub fn run_three_sphere_suite(p: &ThreeSphereParams, seed: u64) -> Result<Report, CliError> {
    use rayon::prelude::*;
    let mut report = Report::new("three_sphere_suite");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let polys: Vec<HarmonicExpansion2D> = (0..p.polynomials)
        .map(|_| {
            let d = rng.random_range(1..=p.max_degree);
            random_holomorphic(&mut rng, d)
        })
        .collect();
    let monomials: Vec<HarmonicExpansion2D> = (0..=p.monomial_max_degree)
        .map(|k| {
            let mut c = vec![Complex64::new(0.0, 0.0); k + 1];
            c[k] = Complex64::new(1.0, 0.0);
            HarmonicExpansion2D::polynomial(&c)
        })
        .collect();
    let mut hadamard = Table::new("hadamard", &["r1", "r2", "r3", "alpha", "max_ratio", "max_monomial_deviation"]);
    let (mut worst, mut worst_mono) = (0.0f64, 0.0f64);
    for (r1, r2, r3) in triples(&p.radii_grid) {
        let ratios: Vec<f64> = polys.par_iter().map(|v| Ok(check_hadamard(v, r1, r2, r3)?.ratio)).collect::<Result<_, CliError>>()?;
        let mono: Vec<f64> = monomials.par_iter().map(|v| Ok((check_hadamard(v, r1, r2, r3)?.ratio - 1.0).abs())).collect::<Result<_, CliError>>()?;
        let max_ratio = ratios.iter().cloned().fold(0.0, f64::max);
        let max_dev = mono.iter().cloned().fold(0.0, f64::max);
        worst = worst.max(max_ratio);
        worst_mono = worst_mono.max(max_dev);
        let alpha = crate::three_sphere::interpolation_exponent(r1, r2, r3)?;
        hadamard.push(vec![num(r1), num(r2), num(r3), num(alpha), num(max_ratio), num(max_dev)]);
    }
    report.metric("hadamard_max_ratio", worst);
    report.metric("hadamard_max_monomial_deviation", worst_mono);
    if let Some(tol) = p.random_tolerance {
        report.assertions.push(Assertion::new("hadamard_random", worst <= 1.0 + tol, worst, format!("<= 1 + {tol:e}")));
    }
    if let Some(tol) = p.monomial_tolerance {
        report.assertions.push(Assertion::new("hadamard_monomials", worst_mono <= tol, worst_mono, format!("|ratio − 1| <= {tol:e}")));
    }
    report.tables.push(hadamard);

    if p.helmholtz_members > 0 {
        let family: Vec<HelmholtzExpansion> = (0..p.helmholtz_members)
            .map(|_| {
                let top = rng.random_range(0..=p.helmholtz_max_degree as i64);
                let mut terms = Vec::new();
                for n in 0..=top {
                    for m in -n..=n {
                        terms.push(HelmholtzTerm { n, m, a: Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)), b: Complex64::new(0.0, 0.0) });
                    }
                }
                HelmholtzExpansion::new(Dim::Three, p.helmholtz_omega, terms)
            })
            .collect::<Result<_, _>>()?;
        let mut table = Table::new("helmholtz", &["r1", "r2", "r3", "alpha", "constant"]);
        let mut worst_c = 0.0f64;
        for (r1, r2, r3) in triples(&p.radii_grid) {
            let c = helmholtz_constant(&family, r1, r2, r3)?;
            worst_c = worst_c.max(c);
            let alpha = crate::three_sphere::interpolation_exponent(r1, r2, r3)?;
            table.push(vec![num(r1), num(r2), num(r3), num(alpha), num(c)]);
        }
        report.metric("helmholtz_max_constant", worst_c);
        report.tables.push(table);
    }
    Ok(report)
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Maxwell3Params {
    pub members: usize,
    pub n_max: usize,
    pub radii: [f64; 3],
    /// Bound on `|C(2·members)/C(members) − 1|`.
    pub stability: Option<f64>,
    pub single_mode_max: usize,
    pub single_mode_tolerance: Option<f64>,
}

impl Default for Maxwell3Params {
    fn default() -> Self {
        Maxwell3Params { members: 200, n_max: 20, radii: [1.0, 1.5, 2.0], stability: Some(0.2), single_mode_max: 20, single_mode_tolerance: Some(1e-8) }
    }
}

impl Validate for Maxwell3Params {
    fn validate(&self) -> Result<(), CliError> {
        increasing("radii", &self.radii)?;
        if self.members == 0 || self.n_max == 0 || self.single_mode_max == 0 {
            return Err(bad("members, n_max and single_mode_max must be positive"));
        }
        Ok(())
    }
}

pub fn run_maxwell_3sphere_suite(p: &Maxwell3Params, seed: u64) -> Result<Report, CliError> {
    let mut report = Report::new("maxwell_3sphere_suite");
    let [r1, r2, r3] = p.radii;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let family: Vec<MaxwellModalField> = (0..2 * p.members).map(|_| random_maxwell_field(&mut rng, p.n_max)).collect();
    let mut table = Table::new("family", &["norm", "members", "constant"]);
    for (label, norm) in [("representative", TraceNorm::Representative), ("trace", TraceNorm::Trace)] {
        let c1 = maxwell_constant(&family[..p.members], r1, r2, r3, norm)?;
        let c2 = maxwell_constant(&family, r1, r2, r3, norm)?;
        table.push(vec![label.into(), p.members.to_string(), num(c1)]);
        table.push(vec![label.into(), (2 * p.members).to_string(), num(c2)]);
        let change = (c2 / c1 - 1.0).abs();
        report.metric(&format!("{label}_constant"), c2);
        report.metric(&format!("{label}_doubling_change"), change);
        if let Some(tol) = p.stability {
            let ok = c2.is_finite() && change <= tol;
            report.assertions.push(Assertion::new(&format!("{label}_constant_stable"), ok, change, format!("finite and |C(2N)/C(N) − 1| <= {tol}")));
        }
    }
    report.tables.push(table);

    let mut single = Table::new("single_mode", &["n", "trace_ratio", "closed_form", "relative_difference", "representative_ratio"]);
    let mut worst = 0.0f64;
    for n in 1..=p.single_mode_max {
        let f = MaxwellModalField { terms: vec![MaxwellTerm { n, m: 0, alpha: [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)], beta: [Complex64::new(0.0, 0.0); 2] }] };
        let tr = check_maxwell_3sphere(&f, r1, r2, r3, TraceNorm::Trace)?.ratio;
        let rep = check_maxwell_3sphere(&f, r1, r2, r3, TraceNorm::Representative)?.ratio;
        let closed = single_mode_trace_ratio(n, r1, r2, r3)?;
        let rel = (tr - closed).abs() / closed;
        worst = worst.max(rel);
        single.push(vec![n.to_string(), num(tr), num(closed), num(rel), num(rep)]);
    }
    report.metric("single_mode_max_relative_difference", worst);
    if let Some(tol) = p.single_mode_tolerance {
        report.assertions.push(Assertion::new("single_mode_closed_form", worst <= tol, worst, format!("<= {tol:e}")));
    }
    report.tables.push(single);
    Ok(report)
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrameParams {
    pub count: usize,
    pub lambda_max: f64,
    pub ns: Vec<f64>,
    pub tolerance: Option<f64>,
}

impl Default for FrameParams {
    fn default() -> Self {
        FrameParams { count: 50, lambda_max: 10.0, ns: vec![10.0, 20.0, 40.0], tolerance: Some(1e-10) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClaimsParams {
    /// Constant part of the test medium, row-major.
    pub base: [[f64; 3]; 3],
    pub amplitude: f64,
    /// `n = multiplier · Λ` for each entry.
    pub multipliers: Vec<f64>,
    pub samples: usize,
    /// The claims are sampled at `λ = lambda_factor / n`.
    pub lambda_factor: f64,
    pub fd_step: f64,
    /// Bound on the growth of `Λ̂` per doubling of `n`.
    pub max_doubling_ratio: Option<f64>,
}

impl Default for ClaimsParams {
    fn default() -> Self {
        ClaimsParams {
            base: [[1.4, 0.2, -0.1], [0.2, 1.0, 0.15], [-0.1, 0.15, 0.8]],
            amplitude: 0.1,
            multipliers: vec![10.0, 20.0, 40.0],
            samples: 400,
            lambda_factor: 1.3,
            fd_step: 1e-6,
            max_doubling_ratio: Some(2.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestMedium {
    Identity,
    Anisotropic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InequalityParams {
    pub media: Vec<TestMedium>,
    pub ps: Vec<f64>,
    pub betas: Vec<f64>,
    pub shell: [f64; 2],
    pub bump: [f64; 2],
    pub tilt: [f64; 3],
    /// Declared `Λ`; default: the measured hypothesis constant rounded up.
    pub declared_lambda: Option<f64>,
    pub radial_panels: usize,
    /// Bound on `max C / min C` across `β` at fixed medium and `p`.
    pub max_variation: Option<f64>,
}

impl Default for InequalityParams {
    fn default() -> Self {
        InequalityParams {
            media: vec![TestMedium::Identity, TestMedium::Anisotropic],
            ps: vec![8.0, 16.0],
            betas: vec![-32.0, -64.0, -128.0],
            shell: [0.5, 1.0],
            bump: [0.55, 0.95],
            tilt: [0.3, 0.0, -0.2],
            declared_lambda: None,
            radial_panels: QuadratureSpec::default().radial_panels,
            max_variation: Some(2.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BookkeepingParams {
    pub lambdas: Vec<f64>,
    pub alphas: Vec<f64>,
    pub p: f64,
    /// `n = multiplier · Λ` for the ratio check.
    pub multiplier: f64,
    pub ratio_tolerance: Option<f64>,
}

impl Default for BookkeepingParams {
    fn default() -> Self {
        BookkeepingParams { lambdas: vec![1.0, 2.0], alphas: vec![0.5, 0.9], p: 8.0, multiplier: 100.0, ratio_tolerance: Some(0.05) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct CarlemanParams {
    pub frame: FrameParams,
    pub claims: ClaimsParams,
    pub inequality: InequalityParams,
    pub bookkeeping: BookkeepingParams,
}

impl Validate for CarlemanParams {
    fn validate(&self) -> Result<(), CliError> {
        if !(self.frame.lambda_max > 1.0) || self.frame.ns.iter().any(|n| !(*n >= 1.0)) {
            return Err(bad("frame: lambda_max must exceed 1 and every n must be >= 1"));
        }
        if !(self.claims.amplitude >= 0.0) {
            return Err(bad("claims.amplitude must be >= 0"));
        }
        positive("claims.fd_step", self.claims.fd_step)?;
        if self.claims.multipliers.iter().any(|m| !(*m >= 10.0)) || self.claims.samples == 0 {
            return Err(bad("claims: multipliers must be >= 10 and samples positive"));
        }
        increasing("inequality.shell", &self.inequality.shell)?;
        increasing("inequality.bump", &self.inequality.bump)?;
        if self.inequality.shell[1] > 1.0 || self.inequality.bump[0] <= self.inequality.shell[0] || self.inequality.bump[1] >= self.inequality.shell[1] {
            return Err(bad("inequality: need shell ⊂ (0, 1] and the bump strictly inside the shell"));
        }
        if self.inequality.ps.iter().any(|p| !(*p >= 1.0)) || self.inequality.betas.iter().any(|b| !(b.abs() >= 1.0)) {
            return Err(bad("inequality: p >= 1 and |β| >= 1 required"));
        }
        if self.bookkeeping.lambdas.iter().any(|l| !(*l >= 1.0)) || self.bookkeeping.alphas.iter().any(|a| !(0.0 < *a && *a < 1.0)) {
            return Err(bad("bookkeeping: Λ >= 1 and α in (0, 1) required"));
        }
        if !(self.bookkeeping.multiplier >= 10.0) {
            return Err(bad("bookkeeping.multiplier must be >= 10"));
        }
        Ok(())
    }
}

fn mat(rows: &[[f64; 3]; 3]) -> Mat3 {
    Mat3::from_fn(|i, j| rows[i][j])
}

/// Random symmetric positive-definite matrix with eigenvalues log-uniform in `[1/l, l]`.
pub fn random_spd<R: Rng>(rng: &mut R, l: f64) -> Mat3 {
    let axis = nalgebra::Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let q = nalgebra::Rotation3::new(axis * std::f64::consts::PI).into_inner();
    let d = Mat3::from_diagonal(&nalgebra::Vector3::from_fn(|_, _| (rng.random_range(-1.0..1.0) * l.ln()).exp()));
    let m = q * d * q.transpose();
    (m + m.transpose()) * 0.5
}

pub fn run_carleman_suite(p: &CarlemanParams, seed: u64) -> Result<Report, CliError> {
    let mut report = Report::new("carleman_suite");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // frame exactness: M_n(Z₀) = γP
    let mut frame = Table::new("frame", &["index", "n", "deviation"]);
    let mut worst = 0.0f64;
    for i in 0..p.frame.count {
        let m0 = random_spd(&mut rng, p.frame.lambda_max * 0.9);
        let z0 = rng.random_range(-0.5..0.5);
        let medium = OscillatingMedium::new(m0, 0.01);
        for &n in &p.frame.ns {
            let f = build_frame(&medium.eval(&[0.0, 0.0, z0]), z0, n, p.frame.lambda_max)?;
            let mz = pushed_matrix(&f, &medium, &f.big_z0)?;
            let want = f.p_matrix(&f.big_z0) * f.gamma;
            let dev = (mz - want).amax() / want.amax();
            worst = worst.max(dev);
            frame.push(vec![i.to_string(), num(n), num(dev)]);
        }
    }
    report.metric("frame_max_deviation", worst);
    if let Some(tol) = p.frame.tolerance {
        report.assertions.push(Assertion::new("frame_exactness", worst < tol, worst, format!("< {tol:e}")));
    }
    report.tables.push(frame);

    // structural claims across n
    let c = &p.claims;
    let medium = OscillatingMedium::new(mat(&c.base), c.amplitude);
    let lam_b = medium.lambda_bound().ceil();
    let mut claims = Table::new("claims", &["n", "lambda", "claim0", "claim1", "claim2", "lambda_hat"]);
    let mut hats = Vec::new();
    let mut per_claim: [Vec<f64>; 3] = Default::default();
    for &k in &c.multipliers {
        let n = k * lam_b;
        let z0 = 0.2;
        let f = build_frame(&medium.eval(&[0.0, 0.0, z0]), z0, n, lam_b)?;
        let lambda = c.lambda_factor / n;
        let xs = f.sample_o(lambda, c.samples, rng.random())?;
        let r = verify_structural_claims(&f, &medium, lambda, &xs, c.fd_step)?;
        claims.push(vec![num(n), num(lambda), num(r.claim0), num(r.claim1), num(r.claim2), num(r.lambda_hat)]);
        hats.push(r.lambda_hat);
        per_claim[0].push(r.claim0);
        per_claim[1].push(r.claim1);
        per_claim[2].push(r.claim2);
    }
    let doubling = |v: &[f64]| v.windows(2).map(|w| (w[1] / w[0]).max(w[0] / w[1])).fold(1.0, f64::max);
    report.metric("claims_lambda_bound", lam_b);
    for (i, v) in per_claim.iter().enumerate() {
        report.metric(&format!("claim{i}_doubling_ratio"), doubling(v));
    }
    let hat_ratio = doubling(&hats);
    report.metric("lambda_hat_doubling_ratio", hat_ratio);
    if let Some(max) = c.max_doubling_ratio {
        report.assertions.push(Assertion::new("claims_n_independent", hat_ratio < max, hat_ratio, format!("Λ̂ ratio per doubling < {max}")));
    }
    report.tables.push(claims);

    // Carleman inequality
    let q = &p.inequality;
    let domain = ShellDomain::new(q.shell[0], q.shell[1])?;
    let bump = RadialBump { inner: q.bump[0], outer: q.bump[1], tilt: q.tilt };
    let quad = QuadratureSpec { radial_panels: q.radial_panels, ..Default::default() };
    let mut ineq = Table::new("inequality", &["medium", "p", "beta", "lhs", "rhs", "measured_c", "c_times_abs_beta", "refinement_change", "hypothesis_lambda"]);
    for &which in &q.media {
        let (label, m): (&str, Box<dyn TensorField>) = match which {
            TestMedium::Identity => ("identity", Box::new(ConstantTensor(Mat3::identity()))),
            TestMedium::Anisotropic => ("anisotropic", Box::new(OscillatingMedium::new(mat(&c.base), c.amplitude))),
        };
        let declared = match q.declared_lambda {
            Some(l) => l,
            None => hypothesis_constant(m.as_ref(), &domain, 1e-5)?.ceil(),
        };
        report.metric(&format!("inequality_{label}_declared_lambda"), declared);
        for &pp in &q.ps {
            let mut cs = Vec::new();
            for &beta in &q.betas {
                let r = carleman_inequality_check(m.as_ref(), declared, &bump, &WeightParams::new(beta, pp)?, &domain, &quad, 1e-5)?;
                let rhs = r.rhs_interior + r.rhs_boundary;
                ineq.push(vec![
                    label.into(),
                    num(pp),
                    num(beta),
                    num(r.lhs),
                    num(rhs),
                    num(r.measured_c),
                    num(r.measured_c * beta.abs()),
                    num(r.refinement_change),
                    num(r.hypothesis_lambda),
                ]);
                cs.push(r.measured_c);
            }
            let v = spread(&cs);
            report.metric(&format!("inequality_{label}_p{pp}_variation"), v);
            if let Some(max) = q.max_variation {
                report.assertions.push(Assertion::new(&format!("inequality_{label}_p{pp}_bounded"), v < max, v, format!("max C / min C across β < {max}")));
            }
        }
    }
    report.tables.push(ineq);

    // exponent bookkeeping
    let b = &p.bookkeeping;
    let mut book = Table::new("bookkeeping", &["lambda", "n", "s_over_tau", "target", "relative_error", "rho"]);
    let mut worst_ratio = 0.0f64;
    for &l in &b.lambdas {
        let bk = exponent_bookkeeping(l, b.multiplier * l, b.p)?;
        let target = (2.0 * l).exp();
        let rel = (bk.ratio / target - 1.0).abs();
        worst_ratio = worst_ratio.max(rel);
        book.push(vec![num(l), num(bk.n), num(bk.ratio), num(target), num(rel), num(bk.rho)]);
    }
    report.metric("bookkeeping_max_ratio_error", worst_ratio);
    if let Some(tol) = b.ratio_tolerance {
        report.assertions.push(Assertion::new("bookkeeping_ratio", worst_ratio < tol, worst_ratio, format!("|s_n/τ_n / e^(2Λ) − 1| < {tol}")));
    }
    report.tables.push(book);
    let mut crossing = Table::new("n0", &["lambda", "alpha", "n0", "rho_at_n0"]);
    for &l in &b.lambdas {
        for &a in &b.alphas {
            let n = n0(a, l, b.p)?;
            let rho = exponent_bookkeeping(l, n as f64, b.p)?.rho;
            crossing.push(vec![num(l), num(a), n.to_string(), num(rho)]);
        }
    }
    report.tables.push(crossing);
    Ok(report)
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GluingParams {
    pub r1: f64,
    pub r2: f64,
    pub p: f64,
    pub omega: f64,
    pub deltas: Vec<f64>,
    pub source: SourceSpec,
    pub n_max: Option<usize>,
    pub samples: usize,
    pub fd_step: f64,
    pub max_jump: Option<f64>,
    /// Bound on `max / min` of the residual over `δ` across the sweep.
    pub max_residual_variation: Option<f64>,
    pub numerics: Numerics,
}

impl Default for GluingParams {
    fn default() -> Self {
        GluingParams {
            r1: 1.0,
            r2: 2.0,
            p: 2.0,
            omega: 1.0,
            deltas: vec![1e-2, 1e-3, 1e-4],
            source: SourceSpec::with_radius(5.0),
            n_max: None,
            samples: 8,
            fd_step: 1e-3,
            max_jump: Some(1e-6),
            max_residual_variation: Some(2.0),
            numerics: Numerics::default(),
        }
    }
}

impl Validate for GluingParams {
    fn validate(&self) -> Result<(), CliError> {
        let r3 = check_dcm_geometry(self.r1, self.r2, self.p, self.omega)?;
        deltas_ok(&self.deltas, 1)?;
        self.source.validate()?;
        if self.source.radius <= r3 {
            return Err(bad(format!("source radius {} must exceed r3 = {r3}", self.source.radius)));
        }
        positive("fd_step", self.fd_step)?;
        if self.samples == 0 || 6.0 * self.fd_step >= r3 - self.r2 {
            return Err(bad("need samples >= 1 and fd_step small against r3 − r2"));
        }
        Ok(())
    }
}

fn shell_points<R: Rng>(rng: &mut R, lo: f64, hi: f64, count: usize) -> Vec<Point> {
    (0..count)
        .map(|_| {
            let z: f64 = rng.random_range(-1.0..1.0);
            let ph = rng.random_range(0.0..std::f64::consts::TAU);
            let r = rng.random_range(lo..hi);
            let s = (1.0 - z * z).sqrt();
            [r * s * ph.cos(), r * s * ph.sin(), r * z]
        })
        .collect()
}

pub fn run_gluing_demo(p: &GluingParams, seed: u64) -> Result<Report, CliError> {
    let mut report = Report::new("gluing_demo");
    let r3 = dcm_r3(p.r1, p.r2, p.p);
    let source = p.source.build(seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let margin = 3.0 * p.fd_step;
    let samples = shell_points(&mut rng, p.r2 + margin, r3 - margin, p.samples);
    let mut solver = Solver::new(p.omega, p.n_max.unwrap_or(p.source.degree()), p.numerics);
    let mut table = Table::new("gluing", &["delta", "jump_r2", "jump_r3", "residual_over_delta", "forcing_mismatch"]);
    let (mut jumps, mut residuals) = (Vec::new(), Vec::new());
    for &d in &p.deltas {
        let medium = make_dcm_example(p.r1, p.r2, p.p, d)?;
        let (f, g) = dcm_maps(&medium)?;
        let sol = solver.solve(&medium, &source)?;
        let (_, r) = remove_localized_singularity(&sol, &f, &g, GluingGeometry { r1: p.r1, r2: p.r2, r3 }, d, &samples, p.fd_step)?;
        table.push(vec![num(d), num(r.jump_r2), num(r.jump_r3), num(r.residual_over_delta), num(r.forcing_mismatch)]);
        jumps.push(r.jump_r2.max(r.jump_r3));
        residuals.push(r.residual_over_delta);
    }
    let max_jump = jumps.iter().cloned().fold(0.0, f64::max);
    let variation = spread(&residuals);
    report.metric("max_jump", max_jump);
    report.metric("residual_over_delta_variation", variation);
    if let Some(tol) = p.max_jump {
        report.assertions.push(Assertion::new("interface_jump", max_jump < tol, max_jump, format!("< {tol:e}")));
    }
    if let Some(max) = p.max_residual_variation {
        report.assertions.push(Assertion::new("residual_over_delta_bounded", variation < max, variation, format!("max/min < {max}")));
    }
    report.tables.push(table);
    Ok(report)
}
