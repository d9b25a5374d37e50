//! Declarative scenario runner.
//!
//! A scenario is a TOML file:
//!
//! ```toml
//! scenario = "spatial_barrier"
//! output = "out/spatial"   # optional
//! seed = 0                 # optional, reserved
//!
//! [units]                  # optional, defaults ħ = c = γ = 1
//! hbar = 1.0
//!
//! [parameters]             # scenario-specific, all optional
//! E0 = 1.0
//! V0 = 2.0
//!
//! [tolerances]             # optional overrides, keyed by check name
//! t_plus_r = 1e-10
//! ```
//!
//! [`validate_config`] reports every problem at once. [`run_scenario`] writes
//! CSV series, JSON state dumps and a `summary.json` that lists each
//! invariant check and the SHA-256 of every other emitted file. Outputs carry
//! no timestamps, so identical configs give byte-identical files.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::algebra::{
    adjoint_defect, build_operator, commutator_bound, commutator_residual, rayleigh_eigenvalue_rows, Axis,
    Classification, GridSpec, OperatorKind, StateVector, Symmetry, Units,
};
use crate::black_hole::{BlackHoleModel, EscapeVerdict};
use crate::cosmology::{accelerations, expansion_report, hamiltonian, integrate_strided, CosmoState};
use crate::spatial_tunneling::{
    classical_encounter, square_barrier_transmission, transmission_reflection, tunneling_momentum, PiecewisePotential,
};
use crate::states::{
    bh_escape_state, boundary_mismatch, spatial_tunnel_state, Mode, MATCH_REL_TOL,
};
use crate::temporal_barrier::{
    exhaustion_time, integrate_classical, profile_value, quantum_contrast, relativistic_energy, system_energy, ClassicalState,
    ClassicalVerdict, EventKind, Model, TemporalProfile,
};

pub const SCENARIOS: [&str; 5] = ["operator_algebra", "spatial_barrier", "temporal_barrier", "black_hole", "cosmology"];

const TOP_LEVEL_KEYS: [&str; 6] = ["scenario", "output", "seed", "units", "parameters", "tolerances"];
const UNIT_KEYS: [&str; 3] = ["hbar", "c", "gamma"];

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    Real,
    Positive,
    NonNegative,
    Count { min: usize },
    Choice(&'static [&'static str]),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Default {
    Real(f64),
    Count(usize),
    Choice(&'static str),
    /// Filled in from other parameters at run time.
    Derived,
}

struct ParamSpec {
    name: &'static str,
    kind: Kind,
    default: Default,
}

const fn p(name: &'static str, kind: Kind, default: Default) -> ParamSpec {
    ParamSpec { name, kind, default }
}

const OPERATOR_ALGEBRA: &[ParamSpec] = &[
    p("n", Kind::Count { min: 8 }, Default::Count(256)),
    p("min", Kind::Real, Default::Real(-10.0)),
    p("max", Kind::Real, Default::Real(10.0)),
    p("probe_center", Kind::Real, Default::Real(0.0)),
    p("probe_width", Kind::Positive, Default::Real(2.0)),
];

const SPATIAL_BARRIER: &[ParamSpec] = &[
    p("q_a", Kind::Real, Default::Real(0.0)),
    p("q_b", Kind::Real, Default::Real(1.0)),
    p("V0", Kind::NonNegative, Default::Real(2.0)),
    p("E0", Kind::Positive, Default::Real(1.0)),
    p("m", Kind::Positive, Default::Real(1.0)),
    p("mode", Kind::Choice(&["literal", "matched"]), Default::Choice("matched")),
    p("sweep_points", Kind::Count { min: 2 }, Default::Count(100)),
    p("sweep_min", Kind::Positive, Default::Derived),
    p("sweep_max", Kind::Positive, Default::Derived),
    p("grid_points", Kind::Count { min: 8 }, Default::Count(256)),
    p("wave_points", Kind::Count { min: 2 }, Default::Count(401)),
];

const TEMPORAL_BARRIER: &[ParamSpec] = &[
    p("profile", Kind::Choice(&["square", "smooth_bump"]), Default::Choice("square")),
    p("t1", Kind::Real, Default::Derived),
    p("t_a", Kind::Real, Default::Real(1.0)),
    p("t_b", Kind::Real, Default::Real(2.0)),
    p("t2", Kind::Real, Default::Derived),
    p("W0", Kind::NonNegative, Default::Real(1.0)),
    p("p0", Kind::Real, Default::Real(1.0)),
    p("pi0", Kind::Real, Default::Real(0.0)),
    p("m", Kind::Positive, Default::Real(1.0)),
    p("model", Kind::Choice(&["non_rel", "rel"]), Default::Choice("non_rel")),
    p("dt", Kind::Positive, Default::Real(1e-3)),
    p("t0", Kind::Real, Default::Derived),
    p("t_end", Kind::Real, Default::Derived),
];

const BLACK_HOLE: &[ParamSpec] = &[
    p("M", Kind::Positive, Default::Real(1.0)),
    p("m", Kind::Positive, Default::Real(1.0)),
    p("p0", Kind::Positive, Default::Real(0.6)),
    p("r_out", Kind::Positive, Default::Real(10.0)),
    p("r_max", Kind::Positive, Default::Real(20.0)),
    p("profile_points", Kind::Count { min: 2 }, Default::Count(1000)),
    p("sweep_points", Kind::Count { min: 2 }, Default::Count(100)),
];

const COSMOLOGY: &[ParamSpec] = &[
    p("qT_re", Kind::Positive, Default::Real(1.0)),
    p("pT_re", Kind::Real, Default::Real(0.0)),
    p("xR_im", Kind::Real, Default::Real(1.0)),
    p("pR_im_mag", Kind::Real, Default::Real(0.0)),
    p("k", Kind::Positive, Default::Real(1.0)),
    p("m", Kind::Positive, Default::Real(1.0)),
    p("dt", Kind::Positive, Default::Real(1e-5)),
    p("t_end", Kind::Positive, Default::Real(1.0)),
    p("stride", Kind::Count { min: 1 }, Default::Count(100)),
    p("consistency_states", Kind::Count { min: 1 }, Default::Count(100)),
];

fn schema(scenario: &str) -> &'static [ParamSpec] {
    match scenario {
        "operator_algebra" => OPERATOR_ALGEBRA,
        "spatial_barrier" => SPATIAL_BARRIER,
        "temporal_barrier" => TEMPORAL_BARRIER,
        "black_hole" => BLACK_HOLE,
        _ => COSMOLOGY,
    }
}

/// Check names and default tolerances per scenario.
fn default_tolerances(scenario: &str) -> &'static [(&'static str, f64)] {
    match scenario {
        "operator_algebra" => &[
            ("adjoint_defect", 0.0),
            ("spectrum_axis", 1e-10),
            ("commutator_q_re", f64::NAN),
            ("commutator_q_im", f64::NAN),
            ("commutator_t_s", f64::NAN),
            ("probe_clear_of_edges", 0.0),
        ],
        "spatial_barrier" => &[
            ("t_plus_r", 1e-10),
            ("closed_form", 1e-10),
            ("classical_reflects_below_barrier", 0.0),
            ("tunnels_below_barrier", 0.0),
            ("boundary_continuity", MATCH_REL_TOL),
            ("rayleigh_mid_barrier", f64::NAN),
        ],
        "temporal_barrier" => &[
            ("energy_identity", f64::NAN),
            ("energy_conservation", 1e-8),
            ("rest_energy_identity", 0.0),
            ("event_location", f64::NAN),
            ("quantum_label_survives", 0.0),
        ],
        "black_hole" => &[
            ("horizon_radius", 1e-15),
            ("potential_continuity", 1e-10),
            ("force_zero_inside", 0.0),
            ("momentum_partition", 0.0),
            ("wkb_in_range", 0.0),
            ("wkb_monotone", 0.0),
            ("wkb_one_iff_classical", 0.0),
        ],
        _ => &[
            ("hamilton_consistency", 1e-6),
            ("acceleration_positivity", 0.0),
            ("energy_drift", 1e-6),
            ("finite_difference_accelerations", 1e-4),
        ],
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ParamValue {
    Real(f64),
    Count(usize),
    Choice(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: String,
    pub output: Option<PathBuf>,
    pub seed: u64,
    pub units: Units,
    pub parameters: BTreeMap<String, ParamValue>,
    /// Overrides only; defaults come from the scenario.
    pub tolerances: BTreeMap<String, f64>,
}

impl ScenarioConfig {
    fn real(&self, name: &str) -> Option<f64> {
        match self.parameters.get(name) {
            Some(ParamValue::Real(v)) => Some(*v),
            _ => None,
        }
    }

    fn count(&self, name: &str) -> usize {
        match self.parameters.get(name) {
            Some(ParamValue::Count(v)) => *v,
            _ => unreachable!("validated count parameter {name}"),
        }
    }

    fn choice(&self, name: &str) -> &str {
        match self.parameters.get(name) {
            Some(ParamValue::Choice(v)) => v,
            _ => unreachable!("validated choice parameter {name}"),
        }
    }

    fn req(&self, name: &str) -> f64 {
        self.real(name).unwrap_or_else(|| unreachable!("validated real parameter {name}"))
    }

    /// Tolerance for `check`, or `fallback` when neither config nor defaults fix one.
    fn tolerance(&self, check: &str, fallback: f64) -> f64 {
        if let Some(&t) = self.tolerances.get(check) {
            return t;
        }
        match default_tolerances(&self.scenario).iter().find(|(n, _)| *n == check) {
            Some((_, t)) if !t.is_nan() => *t,
            _ => fallback,
        }
    }

    /// SHA-256 over everything but the output directory.
    pub fn hash(&self) -> String {
        let canonical = json!({
            "scenario": self.scenario,
            "seed": self.seed,
            "units": {"hbar": self.units.hbar, "c": self.units.c, "gamma": self.units.grav},
            "parameters": self.parameters,
            "tolerances": self.tolerances,
        });
        hex::encode(Sha256::digest(canonical.to_string().as_bytes()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationErrors(pub Vec<String>);

impl fmt::Display for ValidationErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ValidationErrors {}

fn suggestion(key: &str, known: &[&str]) -> String {
    match known.iter().find(|k| strsim::levenshtein(key, k) <= 1) {
        Some(k) => format!(" (did you mean \"{k}\"?)"),
        None => String::new(),
    }
}

fn as_f64(v: &toml::Value) -> Option<f64> {
    match v {
        toml::Value::Float(f) => Some(*f),
        toml::Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

fn check_value(spec: &ParamSpec, v: &toml::Value, errors: &mut Vec<String>) -> Option<ParamValue> {
    let name = spec.name;
    match spec.kind {
        Kind::Count { min } => match v.as_integer() {
            Some(i) if i >= min as i64 => Some(ParamValue::Count(i as usize)),
            Some(i) => {
                errors.push(format!("parameters.{name} must be at least {min}, got {i}"));
                None
            }
            None => {
                errors.push(format!("parameters.{name} must be an integer"));
                None
            }
        },
        Kind::Choice(options) => match v.as_str() {
            Some(s) if options.contains(&s) => Some(ParamValue::Choice(s.to_string())),
            Some(s) => {
                errors.push(format!(
                    "parameters.{name} must be one of {options:?}, got \"{s}\"{}",
                    suggestion(s, options)
                ));
                None
            }
            None => {
                errors.push(format!("parameters.{name} must be a string"));
                None
            }
        },
        Kind::Real | Kind::Positive | Kind::NonNegative => {
            let Some(x) = as_f64(v) else {
                errors.push(format!("parameters.{name} must be a number"));
                return None;
            };
            let ok = x.is_finite()
                && match spec.kind {
                    Kind::Positive => x > 0.0,
                    Kind::NonNegative => x >= 0.0,
                    _ => true,
                };
            if ok {
                Some(ParamValue::Real(x))
            } else {
                let need = match spec.kind {
                    Kind::Positive => "positive and finite",
                    Kind::NonNegative => "non-negative and finite",
                    _ => "finite",
                };
                errors.push(format!("parameters.{name} must be {need}, got {x}"));
                None
            }
        }
    }
}

/// Parses and validates a scenario file, collecting every error.
pub fn validate_config(text: &str) -> Result<ScenarioConfig, ValidationErrors> {
    let table: toml::Table = toml::from_str(text).map_err(|e| ValidationErrors(vec![format!("malformed TOML: {e}")]))?;
    let mut errors = Vec::new();

    for key in table.keys() {
        if !TOP_LEVEL_KEYS.contains(&key.as_str()) {
            errors.push(format!("unknown key \"{key}\"{}", suggestion(key, &TOP_LEVEL_KEYS)));
        }
    }

    let scenario = match table.get("scenario") {
        None => {
            errors.push(format!("missing key \"scenario\" (one of {SCENARIOS:?})"));
            None
        }
        Some(toml::Value::String(s)) if SCENARIOS.contains(&s.as_str()) => Some(s.clone()),
        Some(toml::Value::String(s)) => {
            errors.push(format!("unknown scenario \"{s}\"{}", suggestion(s, &SCENARIOS)));
            None
        }
        Some(_) => {
            errors.push("scenario must be a string".to_string());
            None
        }
    };

    let output = match table.get("output") {
        None => None,
        Some(toml::Value::String(s)) if !s.is_empty() => Some(PathBuf::from(s)),
        Some(_) => {
            errors.push("output must be a non-empty string".to_string());
            None
        }
    };

    let seed = match table.get("seed") {
        None => 0,
        Some(toml::Value::Integer(i)) if *i >= 0 => *i as u64,
        Some(_) => {
            errors.push("seed must be a non-negative integer".to_string());
            0
        }
    };

    let mut units = Units::default();
    match table.get("units") {
        None => {}
        Some(toml::Value::Table(t)) => {
            for (key, v) in t {
                let slot = match key.as_str() {
                    "hbar" => &mut units.hbar,
                    "c" => &mut units.c,
                    "gamma" => &mut units.grav,
                    _ => {
                        errors.push(format!("unknown key \"units.{key}\"{}", suggestion(key, &UNIT_KEYS)));
                        continue;
                    }
                };
                match as_f64(v) {
                    Some(x) if x.is_finite() && x > 0.0 => *slot = x,
                    _ => errors.push(format!("units.{key} must be a positive finite number")),
                }
            }
        }
        Some(_) => errors.push("units must be a table".to_string()),
    }

    let mut parameters = BTreeMap::new();
    let mut tolerances = BTreeMap::new();
    if let Some(scenario) = &scenario {
        let specs = schema(scenario);
        let names: Vec<&str> = specs.iter().map(|s| s.name).collect();
        let given = match table.get("parameters") {
            None => toml::Table::new(),
            Some(toml::Value::Table(t)) => t.clone(),
            Some(_) => {
                errors.push("parameters must be a table".to_string());
                toml::Table::new()
            }
        };
        for key in given.keys() {
            if !names.contains(&key.as_str()) {
                errors.push(format!(
                    "unknown parameter \"{key}\" for {scenario}{}",
                    suggestion(key, &names)
                ));
            }
        }
        for spec in specs {
            let value = match given.get(spec.name) {
                Some(v) => check_value(spec, v, &mut errors),
                None => match spec.default {
                    Default::Real(x) => Some(ParamValue::Real(x)),
                    Default::Count(n) => Some(ParamValue::Count(n)),
                    Default::Choice(s) => Some(ParamValue::Choice(s.to_string())),
                    Default::Derived => None,
                },
            };
            if let Some(v) = value {
                parameters.insert(spec.name.to_string(), v);
            }
        }

        let checks: Vec<&str> = default_tolerances(scenario).iter().map(|(n, _)| *n).collect();
        match table.get("tolerances") {
            None => {}
            Some(toml::Value::Table(t)) => {
                for (key, v) in t {
                    if !checks.contains(&key.as_str()) {
                        errors.push(format!("unknown check \"{key}\" for {scenario}{}", suggestion(key, &checks)));
                        continue;
                    }
                    match as_f64(v) {
                        Some(x) if x.is_finite() && x >= 0.0 => {
                            tolerances.insert(key.clone(), x);
                        }
                        _ => errors.push(format!("tolerances.{key} must be a non-negative finite number")),
                    }
                }
            }
            Some(_) => errors.push("tolerances must be a table".to_string()),
        }
    }

    let mut config = ScenarioConfig {
        scenario: scenario.unwrap_or_default(),
        output,
        seed,
        units,
        parameters,
        tolerances,
    };
    if errors.is_empty() {
        resolve_derived(&mut config, &mut errors);
    }
    if errors.is_empty() {
        Ok(config)
    } else {
        Err(ValidationErrors(errors))
    }
}

/// Fills derived defaults and checks constraints between parameters.
fn resolve_derived(c: &mut ScenarioConfig, errors: &mut Vec<String>) {
    let set = |c: &mut ScenarioConfig, name: &str, v: f64| {
        c.parameters.entry(name.to_string()).or_insert(ParamValue::Real(v));
    };
    match c.scenario.as_str() {
        "operator_algebra" => {
            if c.req("min") >= c.req("max") {
                errors.push("parameters.min must be less than parameters.max".to_string());
            }
        }
        "spatial_barrier" => {
            if c.req("q_a") >= c.req("q_b") {
                errors.push("parameters.q_a must be less than parameters.q_b".to_string());
            }
            let v0 = c.req("V0");
            set(c, "sweep_min", if v0 > 0.0 { 0.01 * v0 } else { 0.01 });
            set(c, "sweep_max", if v0 > 0.0 { 3.0 * v0 } else { 3.0 });
            if c.req("sweep_min") >= c.req("sweep_max") {
                errors.push("parameters.sweep_min must be less than parameters.sweep_max".to_string());
            }
        }
        "temporal_barrier" => {
            let (t_a, t_b) = (c.req("t_a"), c.req("t_b"));
            let width = t_b - t_a;
            if width <= 0.0 {
                errors.push("parameters.t_a must be less than parameters.t_b".to_string());
                return;
            }
            let smooth = c.choice("profile") == "smooth_bump";
            if smooth {
                set(c, "t1", t_a - 0.5 * width);
                set(c, "t2", t_b + 0.5 * width);
                if !(c.req("t1") < t_a && t_b < c.req("t2")) {
                    errors.push("parameters must satisfy t1 < t_a < t_b < t2".to_string());
                }
            } else {
                for key in ["t1", "t2"] {
                    if c.parameters.contains_key(key) {
                        errors.push(format!("parameters.{key} only applies to the smooth_bump profile"));
                    }
                }
            }
            let start = if smooth { c.req("t1") } else { t_a };
            let end = if smooth { c.req("t2") } else { t_b };
            set(c, "t0", start - width);
            set(c, "t_end", end + width);
            if c.req("t0") >= c.req("t_end") {
                errors.push("parameters.t0 must be less than parameters.t_end".to_string());
            }
        }
        "black_hole" if c.req("r_max") <= 0.0 => {
            errors.push("parameters.r_max must be positive".to_string());
        }
        _ => {}
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Artifact {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioResult {
    pub summary: Value,
    pub checks: Vec<Check>,
    pub artifacts: Vec<Artifact>,
    pub out_dir: PathBuf,
}

impl ScenarioResult {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{scenario}: {message}")]
    Module { scenario: String, message: String },
    #[error("writing {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Output directory: flag, then environment, then config, then `out/<scenario>`.
pub fn resolve_output_dir(flag: Option<&Path>, env: Option<&str>, config: &ScenarioConfig) -> PathBuf {
    if let Some(dir) = flag {
        return dir.to_path_buf();
    }
    if let Some(dir) = env.filter(|s| !s.is_empty()) {
        return PathBuf::from(dir);
    }
    config
        .output
        .clone()
        .unwrap_or_else(|| Path::new("out").join(&config.scenario))
}

struct Run<'a> {
    config: &'a ScenarioConfig,
    out_dir: &'a Path,
    checks: Vec<Check>,
    artifacts: Vec<Artifact>,
}

impl Run<'_> {
    fn fail(&self, message: impl fmt::Display) -> RunError {
        RunError::Module {
            scenario: self.config.scenario.clone(),
            message: message.to_string(),
        }
    }

    /// Records `value ≤ tolerance`; a non-finite value fails.
    fn check(&mut self, name: &str, value: f64, fallback_tol: f64) {
        let tolerance = self.config.tolerance(name, fallback_tol);
        self.checks.push(Check {
            name: name.to_string(),
            pass: value.is_finite() && value <= tolerance,
            value,
            tolerance,
        });
    }

    fn emit(&mut self, name: &str, contents: &str) -> Result<(), RunError> {
        let path = self.out_dir.join(name);
        fs::write(&path, contents).map_err(|source| RunError::Io { path, source })?;
        self.artifacts.push(Artifact {
            path: name.to_string(),
            sha256: hex::encode(Sha256::digest(contents.as_bytes())),
        });
        Ok(())
    }

    fn emit_json(&mut self, name: &str, value: &impl Serialize) -> Result<(), RunError> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| self.fail(e))?;
        text.push('\n');
        self.emit(name, &text)
    }
}

fn e(x: f64) -> String {
    format!("{x:.16e}")
}

/// Runs a validated scenario, writing its artifacts into `out_dir`.
pub fn run_scenario(config: &ScenarioConfig, out_dir: &Path) -> Result<ScenarioResult, RunError> {
    fs::create_dir_all(out_dir).map_err(|source| RunError::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let mut run = Run {
        config,
        out_dir,
        checks: Vec::new(),
        artifacts: Vec::new(),
    };
    let results = match config.scenario.as_str() {
        "operator_algebra" => run_operator_algebra(&mut run)?,
        "spatial_barrier" => run_spatial_barrier(&mut run)?,
        "temporal_barrier" => run_temporal_barrier(&mut run)?,
        "black_hole" => run_black_hole(&mut run)?,
        "cosmology" => run_cosmology(&mut run)?,
        other => return Err(run.fail(format!("unknown scenario {other}"))),
    };
    let all_pass = run.checks.iter().all(|c| c.pass);
    let summary = json!({
        "scenario": config.scenario,
        "library_version": env!("CARGO_PKG_VERSION"),
        "config_hash": config.hash(),
        "seed": config.seed,
        "units": {"hbar": config.units.hbar, "c": config.units.c, "gamma": config.units.grav},
        "parameters": config.parameters,
        "results": results,
        "checks": run.checks,
        "all_pass": all_pass,
        "artifacts": run.artifacts,
    });
    let mut text = serde_json::to_string_pretty(&summary).map_err(|e| run.fail(e))?;
    text.push('\n');
    let path = out_dir.join("summary.json");
    fs::write(&path, text).map_err(|source| RunError::Io { path, source })?;
    Ok(ScenarioResult {
        summary,
        checks: run.checks,
        artifacts: run.artifacts,
        out_dir: out_dir.to_path_buf(),
    })
}

fn run_operator_algebra(run: &mut Run) -> Result<Value, RunError> {
    let c = run.config;
    let units = &c.units;
    let (n, min, max) = (c.count("n"), c.req("min"), c.req("max"));
    let (center, width) = (c.req("probe_center"), c.req("probe_width"));

    let mut worst_defect: f64 = 0.0;
    let mut worst_axis: f64 = 0.0;
    let mut spectra = String::from("operator,index,re,im\n");
    let mut per_operator = BTreeMap::new();
    for kind in OperatorKind::ALL {
        let grid = GridSpec::new(kind.axis(), min, max, n).map_err(|e| run.fail(e))?;
        let op = build_operator(kind, &grid, units).map_err(|e| run.fail(e))?;
        let defect = adjoint_defect(&op).in_class(op.symmetry).unwrap_or(f64::INFINITY);
        worst_defect = worst_defect.max(defect);
        let mut eig: Vec<Complex64> = op
            .eigenvalues()
            .ok_or_else(|| run.fail(format!("eigenvalues of {kind:?} did not converge")))?
            .iter()
            .copied()
            .collect();
        eig.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        let radius = eig.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let off_axis = eig
            .iter()
            .map(|z| match op.symmetry {
                Symmetry::SelfAdjoint => z.im.abs(),
                _ => z.re.abs(),
            })
            .fold(0.0, f64::max);
        let rel = if radius > 0.0 { off_axis / radius } else { off_axis };
        worst_axis = worst_axis.max(rel);
        let name = format!("{kind:?}");
        for (i, z) in eig.iter().enumerate() {
            writeln!(spectra, "{name},{i},{},{}", e(z.re), e(z.im)).unwrap();
        }
        per_operator.insert(
            name,
            json!({"symmetry": format!("{:?}", op.symmetry), "adjoint_defect": defect, "spectral_radius": radius, "off_axis_rel": rel}),
        );
    }
    run.check("adjoint_defect", worst_defect, 0.0);
    run.check("spectrum_axis", worst_axis, 1e-10);

    let pairs = [
        ("commutator_q_re", Axis::QRe, OperatorKind::PositionRe, OperatorKind::MomentumRe, 1.0),
        ("commutator_q_im", Axis::XIm, OperatorKind::PositionIm, OperatorKind::MomentumIm, 1.0),
        ("commutator_t_s", Axis::T, OperatorKind::Time, OperatorKind::Energy, -1.0),
    ];
    let mut commutators = String::from("pair,expected_im,residual,bound,wrong_sign_residual\n");
    let mut edge_hits = 0.0;
    let mut residuals = BTreeMap::new();
    for (name, axis, a, b, sign) in pairs {
        let grid = GridSpec::new(axis, min, max, n).map_err(|e| run.fail(e))?;
        let oa = build_operator(a, &grid, units).map_err(|e| run.fail(e))?;
        let ob = build_operator(b, &grid, units).map_err(|e| run.fail(e))?;
        let probe = StateVector::gaussian(&grid, center, width);
        let expected = Complex64::new(0.0, sign * units.hbar);
        let res = commutator_residual(&oa, &ob, expected, &probe).map_err(|e| run.fail(e))?;
        let wrong = commutator_residual(&oa, &ob, -expected, &probe).map_err(|e| run.fail(e))?;
        let bound = commutator_bound(&grid, units, width);
        if res.boundary_warning {
            edge_hits += 1.0;
        }
        writeln!(commutators, "{name},{},{},{},{}", e(expected.im), e(res.residual), e(bound), e(wrong.residual)).unwrap();
        run.check(name, res.residual, bound);
        residuals.insert(name, json!({"residual": res.residual, "bound": bound, "wrong_sign_residual": wrong.residual}));
    }
    run.check("probe_clear_of_edges", edge_hits, 0.0);

    run.emit("spectra.csv", &spectra)?;
    run.emit("commutators.csv", &commutators)?;
    Ok(json!({"operators": per_operator, "commutators": residuals}))
}

fn run_spatial_barrier(run: &mut Run) -> Result<Value, RunError> {
    let c = run.config;
    let units = &c.units;
    let (q_a, q_b, v0, e0, m) = (c.req("q_a"), c.req("q_b"), c.req("V0"), c.req("E0"), c.req("m"));
    let len = q_b - q_a;
    let mode = if c.choice("mode") == "matched" { Mode::Matched } else { Mode::Literal };

    let pot = PiecewisePotential::square_barrier(q_a, q_b, v0).map_err(|e| run.fail(e))?;
    let at = transmission_reflection(&pot, e0, m, units).map_err(|e| run.fail(e))?;
    let encounter = classical_encounter(q_a - len, (2.0 * m * e0).sqrt(), &pot, m).map_err(|e| run.fail(e))?;

    let points = c.count("sweep_points");
    let (lo, hi) = (c.req("sweep_min"), c.req("sweep_max"));
    let mut sweep = String::from("E0,T,R,T_closed_form,classical\n");
    let (mut worst_sum, mut worst_closed) = (0.0_f64, 0.0_f64);
    let (mut not_reflected, mut no_tunneling) = (0.0, 0.0);
    for i in 0..points {
        let energy = lo + (hi - lo) * i as f64 / (points - 1) as f64;
        let s = transmission_reflection(&pot, energy, m, units).map_err(|e| run.fail(e))?;
        let closed = square_barrier_transmission(energy, v0, len, m, units);
        worst_sum = worst_sum.max((s.transmission + s.reflection - 1.0).abs());
        worst_closed = worst_closed.max((s.transmission - closed).abs() / closed);
        let enc = classical_encounter(q_a - len, (2.0 * m * energy).sqrt(), &pot, m).map_err(|e| run.fail(e))?;
        if energy < v0 {
            if !enc.is_reflected() {
                not_reflected += 1.0;
            }
            if !(s.transmission > 0.0) {
                no_tunneling += 1.0;
            }
        }
        let outcome = if enc.is_reflected() { "reflected" } else { "transmitted" };
        writeln!(sweep, "{},{},{},{},{outcome}", e(energy), e(s.transmission), e(s.reflection), e(closed)).unwrap();
    }
    run.check("t_plus_r", worst_sum, 1e-10);
    run.check("closed_form", worst_closed, 1e-10);
    run.check("classical_reflects_below_barrier", not_reflected, 0.0);
    run.check("tunnels_below_barrier", no_tunneling, 0.0);

    let state = spatial_tunnel_state(q_a, q_b, v0, e0, m, units, mode).map_err(|e| run.fail(e))?;
    let continuity = boundary_mismatch(&state, units)
        .map_err(|e| run.fail(e))?
        .iter()
        .map(|b| b.worst_rel())
        .fold(0.0, f64::max);
    if mode == Mode::Matched {
        run.check("boundary_continuity", continuity, MATCH_REL_TOL);
    }

    // Rayleigh quotient of p̂_re on the barrier's own decaying wave.
    let mut rayleigh = Value::Null;
    if e0 < v0 {
        let grid = GridSpec::new(Axis::QRe, q_a, q_b, c.count("grid_points")).map_err(|e| run.fail(e))?;
        let p_re = build_operator(OperatorKind::MomentumRe, &grid, units).map_err(|e| run.fail(e))?;
        let literal = spatial_tunnel_state(q_a, q_b, v0, e0, m, units, Mode::Literal).map_err(|e| run.fail(e))?;
        let psi = literal.regions[1].sample(&grid, units);
        let value = rayleigh_eigenvalue_rows(&p_re, &psi, grid.interior_rows()).map_err(|e| run.fail(e))?;
        let kappa = tunneling_momentum(e0, v0, m).im / units.hbar;
        let dx = grid.spacing();
        let expected = units.hbar * kappa;
        // sinh(κΔ)/Δ overshoots κ by κ³Δ²/6 at leading order.
        let grid_tol = units.hbar * kappa.powi(3) * dx * dx / 6.0 * 1.01 + 1e-12 * expected;
        let gap = if value.class == Classification::Imaginary {
            (value.value.im - expected).abs()
        } else {
            f64::INFINITY
        };
        run.check("rayleigh_mid_barrier", gap, grid_tol);
        rayleigh = json!({
            "value": [value.value.re, value.value.im],
            "class": format!("{:?}", value.class),
            "expected_magnitude": expected,
        });
    }

    let span = (q_b - q_a).max(f64::MIN_POSITIVE);
    let wave_grid = GridSpec::new(Axis::QRe, q_a - 2.0 * span, q_b + 2.0 * span, c.count("wave_points").max(8))
        .map_err(|e| run.fail(e))?;
    let mut wave = String::from("q,re,im,abs\n");
    for q in wave_grid.points() {
        let psi = state.evaluate(q, units).map_or(Complex64::new(0.0, 0.0), |v| v.0);
        writeln!(wave, "{},{},{},{}", e(q), e(psi.re), e(psi.im), e(psi.norm())).unwrap();
    }

    run.emit("sweep.csv", &sweep)?;
    run.emit("wave.csv", &wave)?;
    run.emit_json("state.json", &state)?;
    Ok(json!({
        "T": at.transmission,
        "R": at.reflection,
        "T_closed_form": square_barrier_transmission(e0, v0, len, m, units),
        "tunneling_momentum": [tunneling_momentum(e0, v0, m).re, tunneling_momentum(e0, v0, m).im],
        "classical": encounter,
        "max_boundary_mismatch": continuity,
        "rayleigh_mid_barrier": rayleigh,
    }))
}

fn run_temporal_barrier(run: &mut Run) -> Result<Value, RunError> {
    let c = run.config;
    let units = &c.units;
    let (t_a, t_b, w0) = (c.req("t_a"), c.req("t_b"), c.req("W0"));
    let (p0, pi0, m, dt) = (c.req("p0"), c.req("pi0"), c.req("m"), c.req("dt"));
    let profile = if c.choice("profile") == "square" {
        TemporalProfile::Square { t_a, t_b, w0 }
    } else {
        TemporalProfile::SmoothBump { t1: c.req("t1"), t_a, t_b, t2: c.req("t2"), w0 }
    };
    let model = if c.choice("model") == "rel" { Model::Rel } else { Model::NonRel };
    let start = ClassicalState {
        t: c.req("t0"),
        p_re: p0,
        pi_im: pi0,
        ..ClassicalState::at_rest(m)
    };
    let traj = integrate_classical(&start, &profile, model, dt, c.req("t_end"), units).map_err(|e| run.fail(e))?;

    let e_tot = traj.total_energy;
    let drift = traj
        .rows
        .iter()
        .filter(|row| row.e_system >= 0.0 || model == Model::Rel)
        .map(|row| {
            // Rows at a jump carry one-sided drain values, so use the row's own W.
            let now = system_energy(&row.state, model, units) + row.w;
            (now - e_tot).abs() / e_tot.abs().max(f64::MIN_POSITIVE)
        })
        .fold(0.0, f64::max);
    run.check("energy_conservation", drift, 1e-8);

    let rest = relativistic_energy(0.0, 0.0, m, units).map_err(|e| run.fail(e))?;
    run.check("rest_energy_identity", rest.abs(), 0.0);

    let e_sys0 = e_tot - profile_value(&profile, start.t);
    let zero = traj.first(EventKind::EnergyZero).map(|ev| ev.t);
    let root = exhaustion_time(&profile, e_sys0);
    let location = match (zero, root) {
        (Some(z), Some(r)) => (z - r).abs(),
        (None, None) => 0.0,
        _ => f64::INFINITY,
    };
    run.check("event_location", location, dt);

    let mut quantum = Value::Null;
    if let TemporalProfile::Square { .. } = profile {
        let report = quantum_contrast(&profile, p0, m, units).map_err(|e| run.fail(e))?;
        let scale = [report.energies.e0, report.energies.e_t, report.energies.w0]
            .iter()
            .map(|x| x.abs())
            .fold(0.0, f64::max);
        run.check("energy_identity", report.energy_identity_residual, f64::EPSILON * scale);
        run.check("quantum_label_survives", if report.quantum_survives { 0.0 } else { 1.0 }, 0.0);
        run.emit_json("state.json", &report.state)?;
        let verdict = match report.classical {
            ClassicalVerdict::Survived => json!({"verdict": "survived"}),
            ClassicalVerdict::Destroyed { t } => json!({"verdict": "destroyed", "t": t}),
            ClassicalVerdict::Grazed { t } => json!({"verdict": "grazed", "t": t}),
        };
        quantum = json!({
            "E0": report.energies.e0,
            "E_T": report.energies.e_t,
            "W0": report.energies.w0,
            "verdict": if report.quantum_survives { "survives" } else { "lost" },
            "classical_contrast": verdict,
        });
    }

    run.emit("trajectory.csv", &traj.to_csv())?;
    let events: Vec<Value> = traj
        .events
        .iter()
        .map(|ev| json!({"kind": ev.kind.to_string(), "t": ev.t, "mass_sign": ev.state.mass_sign}))
        .collect();
    Ok(json!({
        "model": model,
        "total_energy": e_tot,
        "events": events,
        "destroyed": traj.destroyed(),
        "exhaustion_root": root,
        "final_p_re": traj.last_state().p_re,
        "quantum": quantum,
    }))
}

fn run_black_hole(run: &mut Run) -> Result<Value, RunError> {
    let c = run.config;
    let units = &c.units;
    let bh = BlackHoleModel::new(c.req("M"), c.req("m"), units).map_err(|e| run.fail(e))?;
    let (p0, r_out, r_max) = (c.req("p0"), c.req("r_out"), c.req("r_max"));
    let oracle = 2.0 * units.grav * bh.hole_mass / (units.c * units.c);
    run.check("horizon_radius", (bh.horizon - oracle).abs() / oracle, 1e-15);

    let r_e = bh.horizon;
    let eps = 1e-12 * r_e;
    let jump = (bh.potential(r_e + eps) - bh.potential(r_e - eps)).abs() / bh.well_depth();
    run.check("potential_continuity", jump, 1e-10);

    let points = c.count("profile_points");
    let rows = bh.radial_profile(p0, r_max, points).map_err(|e| run.fail(e))?;
    let force_inside = rows
        .iter()
        .filter(|row| row.r < r_e)
        .map(|row| bh.force(row.r).abs())
        .fold(0.0, f64::max);
    run.check("force_zero_inside", force_inside, 0.0);

    let e0 = bh.kinetic_energy(p0);
    let mut profile = String::from("r,V,p_re,p_im,allowed\n");
    let mut mismatches = 0.0;
    for row in &rows {
        let energetic = e0 + bh.potential(r_e) >= bh.potential(row.r);
        if energetic != row.allowed {
            mismatches += 1.0;
        }
        writeln!(profile, "{},{},{},{},{}", e(row.r), e(row.potential), e(row.momentum.re), e(row.momentum.im), row.allowed)
            .unwrap();
    }
    run.check("momentum_partition", mismatches, 0.0);

    let sweep_points = c.count("sweep_points");
    let top = 1.5 * bh.well_depth();
    let mut sweep = String::from("E0,P_escape,classical_escape\n");
    let (mut out_of_range, mut decreases, mut iff_violations) = (0.0, 0.0, 0.0);
    let mut previous = 0.0;
    for i in 1..=sweep_points {
        let energy = top * i as f64 / sweep_points as f64;
        let prob = bh.wkb_escape_probability(energy, r_out, units).map_err(|e| run.fail(e))?;
        let escapes = bh.classical_escape_with_energy(energy, r_out).verdict == EscapeVerdict::Escapes;
        if !(prob > 0.0 && prob <= 1.0) {
            out_of_range += 1.0;
        }
        if prob < previous {
            decreases += 1.0;
        }
        if (prob == 1.0) != escapes {
            iff_violations += 1.0;
        }
        previous = prob;
        writeln!(sweep, "{},{},{escapes}", e(energy), e(prob)).unwrap();
    }
    run.check("wkb_in_range", out_of_range, 0.0);
    run.check("wkb_monotone", decreases, 0.0);
    run.check("wkb_one_iff_classical", iff_violations, 0.0);

    let state = bh_escape_state(&bh, r_e, p0, units).map_err(|e| run.fail(e))?;
    let escape = bh.classical_escape_to(p0, r_out);
    let prob = bh.wkb_escape_probability(e0, r_out, units).map_err(|e| run.fail(e))?;

    run.emit("profile.csv", &profile)?;
    run.emit("wkb_sweep.csv", &sweep)?;
    run.emit_json("state.json", &state)?;
    Ok(json!({
        "horizon_radius": r_e,
        "well_depth": bh.well_depth(),
        "E0": e0,
        "turning_radius": if escape.turning_radius.is_finite() { json!(escape.turning_radius) } else { Value::Null },
        "classical": escape.verdict,
        "wkb_escape_probability": prob,
    }))
}

fn run_cosmology(run: &mut Run) -> Result<Value, RunError> {
    let c = run.config;
    let start = CosmoState {
        t: 0.0,
        q_t: c.req("qT_re"),
        p_t: c.req("pT_re"),
        x_r: c.req("xR_im"),
        pi_r: c.req("pR_im_mag"),
        k: c.req("k"),
        m: c.req("m"),
    };
    let traj = integrate_strided(&start, c.req("dt"), c.req("t_end"), c.count("stride")).map_err(|e| run.fail(e))?;

    // Hamilton consistency on states spread along the trajectory.
    let wanted = c.count("consistency_states");
    let step = (traj.samples.len() / wanted).max(1);
    let mut worst: f64 = 0.0;
    for s in traj.samples.iter().step_by(step).take(wanted) {
        let a = accelerations(s).map_err(|e| run.fail(e))?;
        let h_q = 1e-6 * s.q_t;
        let h_x = 1e-6 * s.x_r.abs().max(1e-3);
        let d = |f: &dyn Fn(f64) -> CosmoState, h: f64| -> Result<f64, RunError> {
            let plus = hamiltonian(&f(h)).map_err(|e| run.fail(e))?;
            let minus = hamiltonian(&f(-h)).map_err(|e| run.fail(e))?;
            Ok((plus - minus) / (2.0 * h))
        };
        let dh_dq = d(&|h| CosmoState { q_t: s.q_t + h, ..*s }, h_q)?;
        let dh_dx = d(&|h| CosmoState { x_r: s.x_r + h, ..*s }, h_x)?;
        for (exact, fd) in [(a.a_t_re, -dh_dq / s.m), (a.a_r_im_mag, dh_dx / s.m)] {
            let scale = exact.abs().max(fd.abs());
            if scale > 0.0 {
                worst = worst.max((exact - fd).abs() / scale);
            }
        }
    }
    run.check("hamilton_consistency", worst, 1e-6);

    let report = expansion_report(&traj).ok_or_else(|| run.fail("trajectory too short for a report"))?;
    let negative = (report.eligible_samples - report.positive_samples) as f64;
    run.check("acceleration_positivity", negative, 0.0);
    let drift = traj.max_energy_drift();
    run.check("energy_drift", drift, 1e-6);
    run.check("finite_difference_accelerations", report.max_fd_rel_error, 1e-4);

    run.emit("trajectory.csv", &traj.to_csv())?;
    run.emit("energy_drift.csv", &traj.drift_csv())?;
    let last = traj.samples.last().expect("at least the initial sample");
    Ok(json!({
        "steps": ((c.req("t_end")) / c.req("dt")).round(),
        "H0": hamiltonian(&start).map_err(|e| run.fail(e))?,
        "max_energy_drift": drift,
        "final_state": last,
        "expansion": report,
    }))
}
