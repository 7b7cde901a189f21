//! Scenario files, schema version 1.
//!
//! ```json
//! {
//!   "v": 1,
//!   "name": "iso_ho",
//!   "model": {
//!     "form": {"a": 1, "b": 0, "c": 1},
//!     "f": "0", "g": "0",
//!     "f_lower": 1, "g_lower": 1,
//!     "potential": {"type": "point_symmetric", "rho": "1", "u": "s^2/2"}
//!   },
//!   "initial": {"t": 0, "x": 1, "y": 0, "xdot": 0, "ydot": 1},
//!   "span": {"t_end": 6.283185307179586, "samples": 201},
//!   "integrator": {"rtol": 1e-10, "atol": 1e-12, "max_step": 0, "axis_guard": 1e-8},
//!   "outputs": {"trajectory": true, "report": true},
//!   "verify": {"phase_points": 100, "gauge": "standard"},
//!   "seed": 42
//! }
//! ```

use std::path::Path;

use ermakov_core::dynamics::IntegratorConfig;
use ermakov_core::noether::Gauge;
use ermakov_core::{CartesianState, Error, ErmakovModel, ModelSpec, PotentialSpec, USpec};
use serde_json::{Map, Value};

use crate::CliError;

pub const SCHEMA_VERSION: u64 = 1;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_PHASE_POINTS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outputs {
    pub trajectory: bool,
    pub report: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifySettings {
    pub phase_points: usize,
    pub gauge: Gauge,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub spec: ModelSpec,
    pub model: ErmakovModel,
    pub initial: CartesianState,
    pub t_end: f64,
    pub samples: usize,
    pub integrator: IntegratorConfig,
    pub outputs: Outputs,
    pub verify: VerifySettings,
    pub seed: u64,
}

impl Scenario {
    /// Sample times from the initial time to `t_end`, inclusive.
    pub fn grid(&self) -> Vec<f64> {
        let t0 = self.initial.t;
        let n = self.samples - 1;
        (0..=n)
            .map(|k| if k == n { self.t_end } else { t0 + (self.t_end - t0) * k as f64 / n as f64 })
            .collect()
    }

    pub fn is_point_symmetric(&self) -> bool {
        self.model.point_symmetric().is_some()
    }
}

struct Walker {
    errors: Vec<String>,
}

impl Walker {
    fn object<'a>(&mut self, v: Option<&'a Value>, path: &str, required: bool) -> Option<&'a Map<String, Value>> {
        match v {
            Some(Value::Object(m)) => Some(m),
            Some(_) => {
                self.errors.push(format!("{path}: expected an object"));
                None
            }
            None => {
                if required {
                    self.errors.push(format!("{path}: missing"));
                }
                None
            }
        }
    }

    fn known(&mut self, m: &Map<String, Value>, path: &str, keys: &[&str]) {
        for k in m.keys() {
            if !keys.contains(&k.as_str()) {
                self.errors.push(format!("{path}.{k}: unknown field"));
            }
        }
    }

    fn number(&mut self, m: &Map<String, Value>, key: &str, path: &str, default: Option<f64>) -> f64 {
        match m.get(key) {
            Some(v) => match v.as_f64() {
                Some(x) if x.is_finite() => x,
                _ => {
                    self.errors.push(format!("{path}.{key}: expected a finite number"));
                    f64::NAN
                }
            },
            None => default.unwrap_or_else(|| {
                self.errors.push(format!("{path}.{key}: missing"));
                f64::NAN
            }),
        }
    }

    fn count(&mut self, m: &Map<String, Value>, key: &str, path: &str, default: Option<u64>) -> u64 {
        match m.get(key) {
            Some(v) => v.as_u64().unwrap_or_else(|| {
                self.errors.push(format!("{path}.{key}: expected a non-negative integer"));
                0
            }),
            None => default.unwrap_or_else(|| {
                self.errors.push(format!("{path}.{key}: missing"));
                0
            }),
        }
    }

    fn flag(&mut self, m: &Map<String, Value>, key: &str, path: &str, default: bool) -> bool {
        match m.get(key) {
            Some(Value::Bool(b)) => *b,
            Some(_) => {
                self.errors.push(format!("{path}.{key}: expected true or false"));
                default
            }
            None => default,
        }
    }

    fn text(&mut self, m: &Map<String, Value>, key: &str, path: &str, default: Option<&str>) -> String {
        match m.get(key) {
            Some(Value::String(s)) => s.clone(),
            Some(_) => {
                self.errors.push(format!("{path}.{key}: expected a string"));
                String::new()
            }
            None => default.map(str::to_string).unwrap_or_else(|| {
                self.errors.push(format!("{path}.{key}: missing"));
                String::new()
            }),
        }
    }

    fn u_spec(&mut self, v: Option<&Value>, path: &str) -> USpec {
        match v {
            Some(Value::String(s)) => USpec::Expr(s.clone()),
            Some(Value::Object(m)) => {
                let family = self.text(m, "family", path, None);
                match family.as_str() {
                    "inverse_square_coulomb" => {
                        self.known(m, path, &["family", "a", "b"]);
                        USpec::InverseSquareCoulomb {
                            a: self.number(m, "a", path, None),
                            b: self.number(m, "b", path, None),
                        }
                    }
                    "inverse_square_harmonic" => {
                        self.known(m, path, &["family", "a", "c"]);
                        USpec::InverseSquareHarmonic {
                            a: self.number(m, "a", path, None),
                            c: self.number(m, "c", path, None),
                        }
                    }
                    "" => USpec::Expr(String::new()),
                    other => {
                        self.errors.push(format!(
                            "{path}.family: unknown family \"{other}\" (expected inverse_square_coulomb or inverse_square_harmonic)"
                        ));
                        USpec::Expr(String::new())
                    }
                }
            }
            Some(_) => {
                self.errors.push(format!("{path}: expected an expression string or a family object"));
                USpec::Expr(String::new())
            }
            None => {
                self.errors.push(format!("{path}: missing"));
                USpec::Expr(String::new())
            }
        }
    }

    fn potential(&mut self, v: Option<&Value>, path: &str) -> Option<PotentialSpec> {
        let m = self.object(v, path, true)?;
        let kind = self.text(m, "type", path, None);
        match kind.as_str() {
            "generic" => {
                self.known(m, path, &["type", "vbar"]);
                Some(PotentialSpec::Generic { vbar: self.text(m, "vbar", path, None) })
            }
            "point_symmetric" => {
                self.known(m, path, &["type", "rho", "u"]);
                let rho = self.text(m, "rho", path, Some("1"));
                let u = self.u_spec(m.get("u"), &format!("{path}.u"));
                Some(PotentialSpec::PointSymmetric { rho, u })
            }
            "" => None,
            other => {
                self.errors.push(format!("{path}.type: unknown potential type \"{other}\" (expected generic or point_symmetric)"));
                None
            }
        }
    }

    fn gauge(&mut self, v: Option<&Value>, path: &str) -> Gauge {
        match v {
            None => Gauge::Standard,
            Some(Value::String(s)) if s == "standard" => Gauge::Standard,
            Some(Value::String(s)) if s == "zero" => Gauge::Zero,
            Some(Value::Object(m)) if m.len() == 1 && m.contains_key("corrupted") => {
                Gauge::Corrupted(self.number(m, "corrupted", path, None))
            }
            Some(_) => {
                self.errors.push(format!("{path}: expected \"standard\", \"zero\" or {{\"corrupted\": delta}}"));
                Gauge::Standard
            }
        }
    }
}

/// Parses and validates a scenario; every violation is reported at once.
pub fn parse_scenario(text: &str, fallback_name: &str) -> Result<Scenario, CliError> {
    let root: Value = serde_json::from_str(text).map_err(|e| CliError::Schema(vec![format!("invalid JSON: {e}")]))?;
    let mut w = Walker { errors: Vec::new() };
    let Some(top) = w.object(Some(&root), "scenario", true) else {
        return Err(CliError::Schema(w.errors));
    };
    w.known(
        top,
        "scenario",
        &["v", "name", "model", "initial", "span", "integrator", "outputs", "verify", "seed"],
    );

    match top.get("v").map(Value::as_u64) {
        Some(Some(SCHEMA_VERSION)) => {}
        Some(_) => w.errors.push(format!("v: unsupported schema version (expected {SCHEMA_VERSION})")),
        None => w.errors.push("v: missing".into()),
    }
    let name = w.text(top, "name", "scenario", Some(fallback_name));

    let mut spec = None;
    if let Some(m) = w.object(top.get("model"), "model", true) {
        w.known(m, "model", &["form", "f", "g", "f_lower", "g_lower", "potential"]);
        let (a, b, c) = match w.object(m.get("form"), "model.form", true) {
            Some(f) => {
                w.known(f, "model.form", &["a", "b", "c"]);
                (w.number(f, "a", "model.form", None), w.number(f, "b", "model.form", Some(0.0)), w.number(f, "c", "model.form", None))
            }
            None => (f64::NAN, f64::NAN, f64::NAN),
        };
        let f = w.text(m, "f", "model", Some("0"));
        let g = w.text(m, "g", "model", Some("0"));
        let f_lower = w.number(m, "f_lower", "model", Some(1.0));
        let g_lower = w.number(m, "g_lower", "model", Some(1.0));
        if let Some(potential) = w.potential(m.get("potential"), "model.potential") {
            spec = Some(ModelSpec { a, b, c, f, g, f_lower, g_lower, potential });
        }
    }

    let mut initial = CartesianState::new(f64::NAN, f64::NAN, f64::NAN, f64::NAN, 0.0);
    if let Some(m) = w.object(top.get("initial"), "initial", true) {
        w.known(m, "initial", &["t", "x", "y", "xdot", "ydot"]);
        initial = CartesianState::new(
            w.number(m, "x", "initial", None),
            w.number(m, "y", "initial", None),
            w.number(m, "xdot", "initial", None),
            w.number(m, "ydot", "initial", None),
            w.number(m, "t", "initial", Some(0.0)),
        );
    }

    let (mut t_end, mut samples) = (f64::NAN, 0);
    if let Some(m) = w.object(top.get("span"), "span", true) {
        w.known(m, "span", &["t_end", "samples"]);
        t_end = w.number(m, "t_end", "span", None);
        samples = w.count(m, "samples", "span", Some(201)) as usize;
        if t_end.is_finite() && initial.t.is_finite() && t_end <= initial.t {
            w.errors.push("span.t_end: must exceed the initial time".into());
        }
        if samples < 2 {
            w.errors.push("span.samples: at least 2 samples are required".into());
        }
    }

    let mut integrator = IntegratorConfig::default();
    if let Some(m) = w.object(top.get("integrator"), "integrator", false) {
        w.known(m, "integrator", &["rtol", "atol", "max_step", "axis_guard"]);
        integrator.rel_tol = w.number(m, "rtol", "integrator", Some(integrator.rel_tol));
        integrator.abs_tol = w.number(m, "atol", "integrator", Some(integrator.abs_tol));
        integrator.max_step = w.number(m, "max_step", "integrator", Some(0.0));
        integrator.axis_guard = w.number(m, "axis_guard", "integrator", Some(integrator.axis_guard));
        if integrator.rel_tol.is_finite() && integrator.abs_tol.is_finite() {
            if let Err(e) = integrator.validate() {
                w.errors.push(format!("integrator: {e}"));
            }
        }
    }

    let mut outputs = Outputs { trajectory: true, report: true };
    if let Some(m) = w.object(top.get("outputs"), "outputs", false) {
        w.known(m, "outputs", &["trajectory", "report"]);
        outputs.trajectory = w.flag(m, "trajectory", "outputs", true);
        outputs.report = w.flag(m, "report", "outputs", true);
    }

    let mut verify = VerifySettings { phase_points: DEFAULT_PHASE_POINTS, gauge: Gauge::Standard };
    if let Some(m) = w.object(top.get("verify"), "verify", false) {
        w.known(m, "verify", &["phase_points", "gauge"]);
        verify.phase_points = w.count(m, "phase_points", "verify", Some(DEFAULT_PHASE_POINTS as u64)) as usize;
        verify.gauge = w.gauge(m.get("gauge"), "verify.gauge");
    }

    let seed = match top.get("seed") {
        None => DEFAULT_SEED,
        Some(v) => v.as_u64().unwrap_or_else(|| {
            w.errors.push("seed: expected a non-negative integer".into());
            DEFAULT_SEED
        }),
    };

    let model = match spec.as_ref().map(ErmakovModel::validate) {
        Some(Ok(m)) => Some(m),
        Some(Err(Error::Validation(issues))) => {
            w.errors.extend(issues.into_iter().map(|i| format!("model: {i}")));
            None
        }
        Some(Err(e)) => {
            w.errors.push(format!("model: {e}"));
            None
        }
        None => None,
    };
    let (Some(spec), Some(model)) = (spec, model) else {
        return Err(CliError::Schema(w.errors));
    };
    if !w.errors.is_empty() {
        return Err(CliError::Schema(w.errors));
    }
    Ok(Scenario {
        name,
        spec,
        model,
        initial,
        t_end,
        samples,
        integrator,
        outputs,
        verify,
        seed,
    })
}

pub fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Schema(vec![format!("cannot read {}: {e}", path.display())]))?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario");
    parse_scenario(&text, stem)
}
