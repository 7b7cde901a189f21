//! Machine-readable run reports and trajectory CSV.

use std::io::Write;

use ermakov_core::dynamics::{Drift, Trajectory};
use ermakov_core::ErmakovModel;
use serde::Serialize;

pub const CSV_HEADER: [&str; 10] = ["t", "x", "y", "xdot", "ydot", "R", "theta", "I", "J", "H"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DriftEntry {
    pub max_rel: f64,
    pub at: f64,
}

impl From<Drift> for DriftEntry {
    fn from(d: Drift) -> Self {
        Self { max_rel: d.max_rel, at: d.at }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftSummary {
    #[serde(rename = "I")]
    pub i: DriftEntry,
    #[serde(rename = "J")]
    pub j: Option<DriftEntry>,
    #[serde(rename = "H")]
    pub h: Option<DriftEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stats {
    pub points: usize,
    pub max: f64,
    pub mean: f64,
}

impl Stats {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        Self {
            points: n,
            max: values.iter().fold(0.0, |m, v| m.max(v.abs())),
            mean: if n == 0 { 0.0 } else { values.iter().map(|v| v.abs()).sum::<f64>() / n as f64 },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIPPED",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Claim {
    pub name: &'static str,
    pub status: Status,
    pub value: Option<f64>,
    pub bound: Option<f64>,
    pub detail: String,
}

impl Claim {
    pub fn measured(name: &'static str, value: f64, bound: f64, detail: String) -> Self {
        Self {
            name,
            status: if value <= bound { Status::Pass } else { Status::Fail },
            value: Some(value),
            bound: Some(bound),
            detail,
        }
    }

    pub fn skipped(name: &'static str, reason: String) -> Self {
        Self { name, status: Status::Skipped, value: None, bound: None, detail: reason }
    }

    pub fn line(&self) -> String {
        match (self.value, self.bound) {
            (Some(v), Some(b)) => format!("{} {}: {v:.3e} (bound {b:.0e}) {}", self.status.label(), self.name, self.detail),
            _ => format!("{} {}: {}", self.status.label(), self.name, self.detail),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum MethodState {
    Ok,
    Skipped,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodStatus {
    pub method: &'static str,
    pub status: MethodState,
    pub reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairError {
    pub a: &'static str,
    pub b: &'static str,
    pub max_dx: f64,
    pub max_dy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepStats {
    pub steps: usize,
    pub rejections: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub v: u32,
    pub scenario: String,
    pub command: &'static str,
    pub samples: usize,
    pub drift: Option<DriftSummary>,
    pub integrator: Option<StepStats>,
    pub noether_residual: Option<Stats>,
    pub involution: Option<Stats>,
    pub claims: Vec<Claim>,
    pub methods: Vec<MethodStatus>,
    pub pairs: Vec<PairError>,
    pub exit_code: i32,
}

impl RunReport {
    pub fn new(scenario: &str, command: &'static str) -> Self {
        Self {
            v: 1,
            scenario: scenario.to_string(),
            command,
            samples: 0,
            drift: None,
            integrator: None,
            noether_residual: None,
            involution: None,
            claims: Vec::new(),
            methods: Vec::new(),
            pairs: Vec::new(),
            exit_code: 0,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }
}

/// 17 significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes the trajectory table; `J` and `H` stay blank for generic potentials.
pub fn write_trajectory<W: Write>(out: W, tr: &Trajectory, m: &ErmakovModel) -> Result<(), String> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER).map_err(|e| e.to_string())?;
    for sample in &tr.samples {
        let s = &sample.state;
        let polar = m.form().to_polar(s).map_err(|e| e.to_string())?;
        let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
        w.write_record([
            num(s.t),
            num(s.x),
            num(s.y),
            num(s.x_dot),
            num(s.y_dot),
            num(polar.r),
            num(polar.theta),
            num(sample.i),
            opt(sample.j),
            opt(sample.h),
        ])
        .map_err(|e| e.to_string())?;
    }
    w.flush().map_err(|e| e.to_string())
}
