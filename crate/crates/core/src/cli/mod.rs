//! Scenario runner behind the `cloaklab` binary.
//!
//! A run reads a JSON config
//!
//! ```json
//! { "scenario": "dcm_convergence", "seed": 1, "output_dir": "out/dcm", "parameters": { "deltas": [1e-2, 1e-3] } }
//! ```
//!
//! validates it, executes the scenario and writes one CSV per table, a
//! `manifest.json` and a `summary.txt`. Omitted parameters take the defaults
//! listed in `docs/schemas.md`; unknown keys are rejected.

mod scenarios;

pub use scenarios::*;

use crate::carleman::CarlemanError;
use crate::layered_maxwell::MaxwellError;
use crate::media::MediaError;
use crate::three_sphere::ThreeSphereError;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical guard tripped: {0}")]
    Numerical(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("output error: {0}")]
    Output(String),
}

impl CliError {
    /// 2 for config errors, 4 for numerical guards, 1 otherwise. (3 is
    /// reserved for failed assertions, which are not errors.)
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 4,
            CliError::Io { .. } | CliError::Output(_) => 1,
        }
    }
}

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

impl From<MaxwellError> for CliError {
    fn from(e: MaxwellError) -> Self {
        match e {
            MaxwellError::NearSingularMode { .. } | MaxwellError::TruncationInsufficient { .. } | MaxwellError::Special(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<MediaError> for CliError {
    fn from(e: MediaError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<CarlemanError> for CliError {
    fn from(e: CarlemanError) -> Self {
        match e {
            CarlemanError::QuadratureNotConverged { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<ThreeSphereError> for CliError {
    fn from(e: ThreeSphereError) -> Self {
        match e {
            ThreeSphereError::Special(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

/// The on-disk config before scenario-specific parsing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: String,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default = "empty_object")]
    pub parameters: Value,
}

fn default_seed() -> u64 {
    1
}

fn empty_object() -> Value {
    Value::Object(Default::default())
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(config_err)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
        Self::from_json(&text)
    }

    /// SHA-256 of the canonical (key-sorted, compact) JSON of the config.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(&serde_json::to_value(self).expect("config serialises")).expect("value serialises");
        hex(&Sha256::digest(canonical.as_bytes()))
    }

    /// Parses and validates the parameters.
    pub fn resolve(&self) -> Result<Scenario, CliError> {
        Scenario::parse(&self.scenario, &self.parameters)
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// A CSV table; every cell is already formatted.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Table { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Column `name` parsed back to numbers.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        self.rows.iter().map(|r| r[i].parse().ok()).collect()
    }

    fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).map_err(|e| CliError::Output(e.to_string()))?;
        for r in &self.rows {
            w.write_record(r).map_err(|e| CliError::Output(e.to_string()))?;
        }
        w.into_inner().map_err(|e| CliError::Output(e.to_string()))
    }
}

/// Shortest round-trip representation; identical inputs give identical text.
pub fn num(x: f64) -> String {
    format!("{x:e}")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub requirement: String,
}

impl Assertion {
    pub fn new(name: &str, passed: bool, measured: f64, requirement: impl Into<String>) -> Self {
        Assertion { name: name.into(), passed, measured, requirement: requirement.into() }
    }
}

/// Everything a scenario produces.
#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct Report {
    pub scenario: String,
    pub tables: Vec<Table>,
    pub metrics: BTreeMap<String, f64>,
    pub assertions: Vec<Assertion>,
    pub tolerances: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(scenario: &str) -> Self {
        Report { scenario: scenario.into(), tolerances: module_tolerances(), ..Default::default() }
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn metric(&mut self, key: &str, value: f64) {
        self.metrics.insert(key.into(), value);
    }

    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.passed)
    }

    pub fn summary(&self) -> String {
        let mut s = format!("scenario: {}\n", self.scenario);
        for (k, v) in &self.metrics {
            s += &format!("  {k} = {v:.6e}\n");
        }
        for n in &self.notes {
            s += &format!("  note: {n}\n");
        }
        for a in &self.assertions {
            s += &format!("  [{}] {}: measured {:.6e}, required {}\n", if a.passed { "PASS" } else { "FAIL" }, a.name, a.measured, a.requirement);
        }
        s += &format!("result: {}\n", if self.passed() { "all assertions passed" } else { "assertion failure" });
        s
    }
}

/// Tolerances of the underlying modules, embedded in every manifest.
pub fn module_tolerances() -> BTreeMap<String, f64> {
    let d = crate::layered_maxwell::SolverOptions::default();
    BTreeMap::from([
        ("solver.singular_guard".into(), d.singular_guard),
        ("solver.tail_threshold".into(), d.tail_threshold),
        ("solver.interface_residual".into(), 1e-9),
        ("l2_norm.relative_accuracy".into(), 1e-8),
        ("carleman.quadrature_refinement".into(), 1e-2),
    ])
}

/// Outcome of a run whose outputs were written.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: Report,
    pub output_dir: PathBuf,
    pub files: Vec<PathBuf>,
}

impl RunOutcome {
    /// 0 when every assertion held, 3 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.report.passed() {
            0
        } else {
            3
        }
    }
}

/// Validates, executes and writes the outputs. `output_override` wins over
/// the config's `output_dir`; with neither, `./cloaklab-<scenario>` is used.
pub fn run(config: &ScenarioConfig, output_override: Option<&Path>) -> Result<RunOutcome, CliError> {
    let scenario = config.resolve()?;
    let report = scenario.execute(config.seed)?;
    let dir = output_override
        .map(Path::to_path_buf)
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from(format!("cloaklab-{}", config.scenario)));
    let files = write_outputs(config, &scenario, &report, &dir)?;
    Ok(RunOutcome { report, output_dir: dir, files })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn write_outputs(config: &ScenarioConfig, scenario: &Scenario, report: &Report, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.to_path_buf(), source })?;
    let mut files = Vec::new();
    let mut outputs = BTreeMap::new();
    for t in &report.tables {
        let bytes = t.to_csv()?;
        let path = dir.join(format!("{}.csv", t.name));
        write_file(&path, &bytes)?;
        outputs.insert(format!("{}.csv", t.name), hex(&Sha256::digest(&bytes)));
        files.push(path);
    }
    let manifest = serde_json::json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "schema_version": SCHEMA_VERSION,
        "scenario": config.scenario,
        "seed": config.seed,
        "config_sha256": config.hash(),
        "config": config,
        "parameters": scenario.parameters_json(),
        "tolerances": report.tolerances,
        "metrics": report.metrics,
        "assertions": report.assertions,
        "notes": report.notes,
        "outputs": outputs,
        "passed": report.passed(),
    });
    let path = dir.join("manifest.json");
    write_file(&path, serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Output(e.to_string()))?.as_bytes())?;
    files.push(path);
    let path = dir.join("summary.txt");
    write_file(&path, report.summary().as_bytes())?;
    files.push(path);
    Ok(files)
}

/// `(name, description)` of every scenario.
pub fn list_scenarios() -> Vec<(&'static str, &'static str)> {
    SCENARIOS.to_vec()
}
