//! Experiment configuration: one JSON document with a `schema` version.
//!
//! Validation runs on the raw JSON first so that every problem is reported at
//! once (unknown keys, wrong types, out-of-range values, fields the command
//! needs); only a clean document is deserialized into [`ExperimentConfig`].

use std::path::{Path, PathBuf};

use density_core::io::{read_density_csv, read_tail_json};
use density_core::{Builtin, Grid, GridDensity};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::RunError;

pub const SCHEMA_VERSION: &str = "kaclab/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Command {
    #[serde(rename = "simulate-walk")]
    SimulateWalk,
    #[serde(rename = "solve-boltzmann")]
    SolveBoltzmann,
    #[serde(rename = "certify")]
    Certify,
    #[serde(rename = "scan-N")]
    ScanN,
    #[serde(rename = "chaos-metrics")]
    ChaosMetrics,
}

impl Command {
    const ALL: [(&'static str, Command); 5] = [
        ("simulate-walk", Command::SimulateWalk),
        ("solve-boltzmann", Command::SolveBoltzmann),
        ("certify", Command::Certify),
        ("scan-N", Command::ScanN),
        ("chaos-metrics", Command::ChaosMetrics),
    ];

    pub fn name(self) -> &'static str {
        Command::ALL.iter().find(|(_, c)| *c == self).map(|(s, _)| *s).unwrap()
    }

    fn parse(s: &str) -> Option<Command> {
        Command::ALL.iter().find(|(n, _)| *n == s).map(|(_, c)| *c)
    }

    /// Parameters that have no default for this command.
    fn required(self) -> &'static [&'static str] {
        match self {
            Command::SimulateWalk => &["n", "gamma", "t_end", "seed"],
            Command::SolveBoltzmann => &["gamma", "t_end"],
            Command::Certify => &["n", "gamma", "beta", "k"],
            Command::ScanN => &["n", "gamma"],
            Command::ChaosMetrics => &["n", "gamma", "t_end", "seed"],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsvDensity {
    pub csv: PathBuf,
    /// Optional tail bounds (JSON), needed by the log-scalable checks.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DensitySource {
    Builtin(Builtin),
    Csv(CsvDensity),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default)]
    pub n: Vec<usize>,
    pub gamma: Option<f64>,
    pub beta: Option<f64>,
    pub k: Option<f64>,
    /// Exponential-moment weight `e^{a|v|^mu}`; both or neither.
    pub a: Option<f64>,
    pub mu: Option<f64>,
    /// The `ε` of `sup_{x≥1} ln x / x^ε`.
    pub eps: Option<f64>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub sample_times: Vec<f64>,
    pub ensemble: Option<usize>,
    pub bins: Option<usize>,
    pub range: Option<f64>,
    pub theta_nodes: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridOverride {
    pub v_max: Option<f64>,
    pub n_points: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: String,
    pub command: Command,
    pub density: DensitySource,
    /// Rescale a builtin to unit energy before use (default true).
    pub unit_energy: Option<bool>,
    #[serde(default)]
    pub params: Params,
    pub grid: Option<GridOverride>,
    pub output: Option<PathBuf>,
}

pub const DEFAULT_EPS: f64 = 0.5;
pub const DEFAULT_THETA_NODES: usize = 64;
pub const DEFAULT_CHAOS_ENSEMBLE: usize = 100;

impl ExperimentConfig {
    pub fn grid(&self) -> Result<Grid, RunError> {
        let d = Grid::default();
        let g = match self.grid {
            None => d,
            Some(o) => Grid { v_max: o.v_max.unwrap_or(d.v_max), n_points: o.n_points.unwrap_or(d.n_points) },
        };
        g.validate()?;
        Ok(g)
    }

    /// The one-particle density on the active grid. Relative CSV paths are
    /// resolved against `base` (the config's directory).
    pub fn load_density(&self, base: &Path) -> Result<GridDensity, RunError> {
        match &self.density {
            DensitySource::Builtin(b) => {
                let g = self.grid()?;
                Ok(if self.unit_energy.unwrap_or(true) { b.sample_unit_energy(&g)? } else { b.sample(&g)? })
            }
            DensitySource::Csv(c) => {
                let f = read_density_csv(base.join(&c.csv))?;
                Ok(match &c.tail {
                    Some(t) => {
                        let f = f.with_tail(read_tail_json(base.join(t))?);
                        f.validate_tail()?;
                        f
                    }
                    None => f,
                })
            }
        }
    }

    /// Files whose bytes enter the inputs hash besides the config itself.
    pub fn input_files(&self, base: &Path) -> Vec<PathBuf> {
        match &self.density {
            DensitySource::Builtin(_) => Vec::new(),
            DensitySource::Csv(c) => std::iter::once(&c.csv).chain(&c.tail).map(|p| base.join(p)).collect(),
        }
    }

    pub fn density_label(&self) -> String {
        match &self.density {
            DensitySource::Builtin(Builtin::Maxwellian { temperature }) => format!("maxwellian(T={temperature})"),
            DensitySource::Builtin(Builtin::Bimodal { mu, sigma }) => format!("bimodal(mu={mu}, sigma={sigma})"),
            DensitySource::Builtin(Builtin::UniformEnergy) => "uniform-energy".into(),
            DensitySource::Csv(c) => format!("csv({})", c.csv.display()),
        }
    }
}

/// Validates `doc` and deserializes it. `seed_override` and `out_override`
/// say whether the command line supplies the seed and the output directory.
pub fn parse_config(doc: &str, seed_override: bool, out_override: bool) -> Result<ExperimentConfig, RunError> {
    let value: Value = serde_json::from_str(doc).map_err(|e| RunError::Schema(vec![format!("not valid JSON: {e}")]))?;
    let errors = validate(&value, seed_override, out_override);
    if !errors.is_empty() {
        return Err(RunError::Schema(errors));
    }
    serde_json::from_value(value).map_err(|e| RunError::Schema(vec![e.to_string()]))
}

struct Checker {
    errors: Vec<String>,
}

impl Checker {
    fn err(&mut self, path: &str, msg: impl std::fmt::Display) {
        self.errors.push(format!("{path}: {msg}"));
    }

    fn keys(&mut self, path: &str, obj: &Map<String, Value>, allowed: &[&str]) {
        for k in obj.keys() {
            if !allowed.contains(&k.as_str()) {
                self.err(&format!("{path}.{k}"), "unknown key");
            }
        }
    }

    fn number(&mut self, path: &str, v: &Value, ok: fn(f64) -> bool, what: &str) -> Option<f64> {
        match v.as_f64() {
            Some(x) if ok(x) => Some(x),
            Some(x) => {
                self.err(path, format!("{what}, got {x}"));
                None
            }
            None => {
                self.err(path, format!("expected a number, got {v}"));
                None
            }
        }
    }

    fn integer(&mut self, path: &str, v: &Value, min: u64) -> Option<u64> {
        match v.as_u64() {
            Some(x) if x >= min => Some(x),
            Some(x) => {
                self.err(path, format!("must be at least {min}, got {x}"));
                None
            }
            None => {
                self.err(path, format!("expected a nonnegative integer, got {v}"));
                None
            }
        }
    }

    fn object<'a>(&mut self, path: &str, v: &'a Value) -> Option<&'a Map<String, Value>> {
        let o = v.as_object();
        if o.is_none() {
            self.err(path, format!("expected an object, got {v}"));
        }
        o
    }
}

fn positive(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

fn validate(value: &Value, seed_override: bool, out_override: bool) -> Vec<String> {
    let mut c = Checker { errors: Vec::new() };
    let Some(top) = c.object("config", value) else { return c.errors };
    c.keys("config", top, &["schema", "command", "density", "unit_energy", "params", "grid", "output"]);

    match top.get("schema") {
        Some(Value::String(s)) if s == SCHEMA_VERSION => {}
        Some(v) => c.err("config.schema", format!("expected \"{SCHEMA_VERSION}\", got {v}")),
        None => c.err("config.schema", "missing"),
    }
    let command = match top.get("command") {
        Some(Value::String(s)) => {
            let cmd = Command::parse(s);
            if cmd.is_none() {
                let names: Vec<&str> = Command::ALL.iter().map(|(n, _)| *n).collect();
                c.err("config.command", format!("unknown command {s:?}; expected one of {names:?}"));
            }
            cmd
        }
        Some(v) => {
            c.err("config.command", format!("expected a string, got {v}"));
            None
        }
        None => {
            c.err("config.command", "missing");
            None
        }
    };

    let is_csv = validate_density(&mut c, top.get("density"));
    if let Some(u) = top.get("unit_energy") {
        if !u.is_boolean() {
            c.err("config.unit_energy", format!("expected a boolean, got {u}"));
        } else if is_csv {
            c.err("config.unit_energy", "applies to builtin densities only");
        }
    }
    if let Some(g) = top.get("grid") {
        if is_csv {
            c.err("config.grid", "grid overrides apply to builtin densities; a CSV density carries its own grid");
        }
        if let Some(o) = c.object("config.grid", g) {
            c.keys("config.grid", o, &["v_max", "n_points"]);
            if let Some(v) = o.get("v_max") {
                c.number("config.grid.v_max", v, positive, "must be positive");
            }
            if let Some(v) = o.get("n_points") {
                c.integer("config.grid.n_points", v, 12);
            }
        }
    }
    match top.get("output") {
        Some(Value::String(_)) => {}
        Some(v) => c.err("config.output", format!("expected a path string, got {v}")),
        None if !out_override => c.err("config.output", "missing (or pass --out)"),
        None => {}
    }

    let empty = Map::new();
    let params = match top.get("params") {
        Some(p) => c.object("config.params", p).unwrap_or(&empty),
        None => &empty,
    };
    validate_params(&mut c, params, command, seed_override);
    c.errors
}

/// Returns whether the source is a CSV file.
fn validate_density(c: &mut Checker, d: Option<&Value>) -> bool {
    let Some(d) = d else {
        c.err("config.density", "missing");
        return false;
    };
    let Some(o) = c.object("config.density", d) else { return false };
    match (o.get("builtin"), o.get("csv")) {
        (Some(_), Some(_)) => {
            c.err("config.density", "give either \"builtin\" or \"csv\", not both");
            false
        }
        (Some(Value::String(name)), None) => {
            let p = "config.density";
            match name.as_str() {
                "maxwellian" => {
                    c.keys(p, o, &["builtin", "temperature"]);
                    match o.get("temperature") {
                        Some(t) => {
                            c.number("config.density.temperature", t, positive, "must be positive");
                        }
                        None => c.err("config.density.temperature", "missing"),
                    }
                }
                "bimodal" => {
                    c.keys(p, o, &["builtin", "mu", "sigma"]);
                    match o.get("mu") {
                        Some(m) => {
                            c.number("config.density.mu", m, f64::is_finite, "must be finite");
                        }
                        None => c.err("config.density.mu", "missing"),
                    }
                    match o.get("sigma") {
                        Some(s) => {
                            c.number("config.density.sigma", s, positive, "must be positive");
                        }
                        None => c.err("config.density.sigma", "missing"),
                    }
                }
                "uniform-energy" => c.keys(p, o, &["builtin"]),
                other => c.err(
                    "config.density.builtin",
                    format!("unknown builtin {other:?}; expected maxwellian, bimodal or uniform-energy"),
                ),
            }
            false
        }
        (Some(v), None) => {
            c.err("config.density.builtin", format!("expected a string, got {v}"));
            false
        }
        (None, Some(path)) => {
            c.keys("config.density", o, &["csv", "tail"]);
            if !path.is_string() {
                c.err("config.density.csv", format!("expected a path string, got {path}"));
            }
            if let Some(t) = o.get("tail") {
                if !t.is_string() {
                    c.err("config.density.tail", format!("expected a path string, got {t}"));
                }
            }
            true
        }
        (None, None) => {
            c.err("config.density", "needs \"builtin\" or \"csv\"");
            false
        }
    }
}

const PARAM_KEYS: [&str; 15] = [
    "n", "gamma", "beta", "k", "a", "mu", "eps", "dt", "t_end", "seed", "sample_times", "ensemble", "bins", "range",
    "theta_nodes",
];

fn validate_params(c: &mut Checker, p: &Map<String, Value>, command: Option<Command>, seed_override: bool) {
    c.keys("config.params", p, &PARAM_KEYS);
    let path = |k: &str| format!("config.params.{k}");

    if let Some(v) = p.get("n") {
        match v.as_array() {
            Some(list) if !list.is_empty() => {
                let ns: Vec<Option<u64>> =
                    list.iter().enumerate().map(|(i, x)| c.integer(&format!("config.params.n[{i}]"), x, 2)).collect();
                let ns: Vec<u64> = ns.into_iter().flatten().collect();
                if ns.len() == list.len() && ns.windows(2).any(|w| w[1] <= w[0]) {
                    c.err(&path("n"), "must be strictly ascending");
                }
            }
            Some(_) => c.err(&path("n"), "must not be empty"),
            None => c.err(&path("n"), format!("expected a list of integers, got {v}")),
        }
    }
    let gamma = p.get("gamma").and_then(|v| c.number(&path("gamma"), v, |x| (0.0..=1.0).contains(&x), "must lie in [0, 1]"));
    let beta = p.get("beta").and_then(|v| c.number(&path("beta"), v, positive, "must be positive"));
    let k = p.get("k").and_then(|v| c.number(&path("k"), v, |x| x.is_finite() && x > 1.0, "must exceed 1"));
    for key in ["a", "mu", "eps", "dt", "range"] {
        if let Some(v) = p.get(key) {
            c.number(&path(key), v, positive, "must be positive");
        }
    }
    if p.contains_key("a") != p.contains_key("mu") {
        c.err("config.params", "a and mu select the exponential moment and must be given together");
    }
    let t_end = p.get("t_end").and_then(|v| c.number(&path("t_end"), v, positive, "must be positive"));
    if let Some(v) = p.get("seed") {
        c.integer(&path("seed"), v, 0);
    }
    if let Some(v) = p.get("sample_times") {
        match v.as_array() {
            Some(list) => {
                for (i, x) in list.iter().enumerate() {
                    if let Some(t) = c.number(&format!("config.params.sample_times[{i}]"), x, |t| t.is_finite() && t >= 0.0, "must be nonnegative") {
                        if t_end.is_some_and(|e| t > e) {
                            c.err(&format!("config.params.sample_times[{i}]"), format!("{t} exceeds t_end"));
                        }
                    }
                }
            }
            None => c.err(&path("sample_times"), format!("expected a list of numbers, got {v}")),
        }
    }
    if let Some(v) = p.get("ensemble") {
        c.integer(&path("ensemble"), v, 1);
    }
    if let Some(v) = p.get("bins") {
        c.integer(&path("bins"), v, 2);
    }
    if let Some(v) = p.get("theta_nodes") {
        c.integer(&path("theta_nodes"), v, 64);
    }

    let Some(cmd) = command else { return };
    for key in cmd.required() {
        if *key == "seed" && seed_override {
            continue;
        }
        if !p.contains_key(*key) {
            c.err(&path(key), format!("required by {}", cmd.name()));
        }
    }
    if cmd == Command::Certify {
        if gamma == Some(1.0) {
            c.err(&path("gamma"), "certify needs gamma < 1");
        }
        if let (Some(k), Some(b)) = (k, beta) {
            if k * b <= 1.0 + b {
                c.err("config.params", format!("certify needs k*beta > 1 + beta, got k = {k}, beta = {b}"));
            }
        }
    }
}
