//! `run`, `verify` and `compare`.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use ermakov_core::dynamics::{check_axes, integrate_sampled, Trajectory};
use ermakov_core::invariants::{ermakov_i_cart, ermakov_i_polar};
use ermakov_core::linearize::solve_by_linearisation;
use ermakov_core::noether::{
    converse_polar, noether_residual, poisson_bracket, polar_variation, ConverseGenerator, FlowPoint, PhaseFunction,
    PhasePoint, PointSymmetry, SymmetryGenerator, TauChoice,
};
use ermakov_core::solver::solve_by_quadrature;
use ermakov_core::{CartesianState, Error};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::report::{
    num, write_trajectory, Claim, DriftSummary, MethodState, MethodStatus, PairError, RunReport, Stats, Status, StepStats,
};
use crate::scenario::Scenario;
use crate::CliError;

pub const DRIFT_BOUND: f64 = 1e-8;
pub const NOETHER_BOUND: f64 = 1e-9;
pub const CONVERSE_BOUND: f64 = 1e-10;
pub const INVOLUTION_BOUND: f64 = 1e-8;
pub const REPRESENTATION_BOUND: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct CommandOutput {
    pub report: RunReport,
    /// Human-readable lines for stdout.
    pub lines: Vec<String>,
    pub files: Vec<PathBuf>,
}

fn runtime(e: Error) -> CliError {
    CliError::Runtime(e.to_string())
}

fn write_file(dir: &Path, name: String, contents: &[u8], files: &mut Vec<PathBuf>) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    files.push(path);
    Ok(())
}

fn direct(scn: &Scenario) -> Result<Trajectory, Error> {
    integrate_sampled(&scn.model, &scn.initial, &scn.grid(), &scn.integrator)
}

fn drift_summary(tr: &Trajectory) -> DriftSummary {
    let d = tr.drift_report();
    DriftSummary {
        i: d.i.into(),
        j: d.j.map(Into::into),
        h: d.h.map(Into::into),
    }
}

/// Integrates the scenario and writes the trajectory CSV and report.
pub fn run(scn: &Scenario, out: &Path) -> Result<CommandOutput, CliError> {
    let tr = direct(scn).map_err(runtime)?;
    let mut report = RunReport::new(&scn.name, "run");
    report.samples = tr.samples.len();
    report.drift = Some(drift_summary(&tr));
    report.integrator = Some(StepStats {
        steps: tr.stats.steps,
        rejections: tr.stats.rejections,
        evaluations: tr.stats.evaluations,
    });
    let mut files = Vec::new();
    if scn.outputs.trajectory {
        let mut buf = Vec::new();
        write_trajectory(&mut buf, &tr, &scn.model).map_err(CliError::Runtime)?;
        write_file(out, format!("{}.csv", scn.name), &buf, &mut files)?;
    }
    let json = report.to_json();
    if scn.outputs.report {
        write_file(out, format!("{}.report.json", scn.name), json.as_bytes(), &mut files)?;
    }
    Ok(CommandOutput {
        report,
        lines: vec![json.trim_end().to_string()],
        files,
    })
}

/// Seeded perturbations of trajectory samples that stay off singular axes.
fn phase_points(scn: &Scenario, tr: &Trajectory) -> Vec<CartesianState> {
    let mut rng = ChaCha8Rng::seed_from_u64(scn.seed);
    let mut points = Vec::with_capacity(scn.verify.phase_points);
    let mut attempts = 0;
    while points.len() < scn.verify.phase_points && attempts < 20 * scn.verify.phase_points.max(1) {
        attempts += 1;
        let base = tr.samples[rng.random_range(0..tr.samples.len())].state;
        let mut jiggle = |v: f64| v + 0.05 * (2.0 * rng.random::<f64>() - 1.0) * v.abs().max(0.1);
        let s = CartesianState::new(jiggle(base.x), jiggle(base.y), jiggle(base.x_dot), jiggle(base.y_dot), base.t);
        let usable = check_axes(s.x, s.y, &scn.model, scn.integrator.axis_guard).is_ok()
            && s.angular_momentum() != 0.0
            && ermakov_i_cart(&s, &scn.model).is_ok()
            && FlowPoint::new(&s, &scn.model).is_ok();
        if usable {
            points.push(s);
        }
    }
    points
}

fn converse_mismatch(s: &CartesianState, scn: &Scenario) -> Result<f64, Error> {
    let m = &scn.model;
    let polar = m.form().to_polar(s)?;
    let p = FlowPoint::new(s, m)?;
    let mut worst = 0.0f64;
    for tau in TauChoice::ALL {
        let g = ConverseGenerator::new(tau).evaluate(&p)?;
        let (dr, dtheta) = polar_variation([g.eta[0].value, g.eta[1].value], s, m)?;
        let (er, etheta) = converse_polar(tau.polar_value(&polar), &polar, m.kappa());
        worst = worst.max((dr - er).abs() / er.abs().max(1.0));
        worst = worst.max((dtheta - etheta).abs() / etheta.abs().max(1.0));
    }
    Ok(worst)
}

/// Runs the claim suite on the scenario.
pub fn verify(scn: &Scenario, out: Option<&Path>) -> Result<CommandOutput, CliError> {
    let m = &scn.model;
    let tr = direct(scn).map_err(runtime)?;
    let mut report = RunReport::new(&scn.name, "verify");
    report.samples = tr.samples.len();
    let drift = drift_summary(&tr);
    let points = phase_points(scn, &tr);
    let n = points.len();
    let ps = scn.is_point_symmetric();

    let mut claims = vec![Claim::measured("I drift", drift.i.max_rel, DRIFT_BOUND, format!("worst at t = {}", drift.i.at))];
    claims.push(match drift.j {
        Some(j) => Claim::measured("J drift", j.max_rel, DRIFT_BOUND, format!("worst at t = {}", j.at)),
        None => Claim::skipped("J drift", "generic potential has no Noether invariant".into()),
    });

    if ps {
        let sym = PointSymmetry { gauge: scn.verify.gauge };
        let mut scaled = Vec::with_capacity(n);
        for s in &points {
            let lag = FlowPoint::new(s, m).and_then(|p| p.lagrangian()).map_err(runtime)?.value;
            scaled.push(noether_residual(&sym, s, m).map_err(runtime)? / (1.0 + lag.abs()));
        }
        let stats = Stats::of(&scaled);
        report.noether_residual = Some(stats);
        claims.push(Claim::measured("Noether residual", stats.max, NOETHER_BOUND, format!("at {n} phase points")));
    } else {
        claims.push(Claim::skipped("Noether residual", "generic potential".into()));
    }

    let mut converse = 0.0f64;
    for s in &points {
        converse = converse.max(converse_mismatch(s, scn).map_err(runtime)?);
    }
    claims.push(Claim::measured("converse generator", converse, CONVERSE_BOUND, format!("at {n} phase points, 3 tau choices")));

    if ps {
        let mut brackets = Vec::with_capacity(n);
        for s in &points {
            let p = PhasePoint::from_state(s, m);
            brackets.push(poisson_bracket(PhaseFunction::I, PhaseFunction::J, &p, m).map_err(runtime)?);
        }
        let stats = Stats::of(&brackets);
        report.involution = Some(stats);
        claims.push(Claim::measured("involution {I,J}", stats.max, INVOLUTION_BOUND, format!("at {n} phase points")));
    } else {
        claims.push(Claim::skipped("involution {I,J}", "generic potential".into()));
    }

    let mut repr = 0.0f64;
    for s in &points {
        let ic = ermakov_i_cart(s, m).map_err(runtime)?;
        let ip = ermakov_i_polar(&m.form().to_polar(s).map_err(runtime)?, m).map_err(runtime)?;
        repr = repr.max((ic - ip).abs() / ic.abs().max(1.0));
    }
    claims.push(Claim::measured("polar/Cartesian I", repr, REPRESENTATION_BOUND, format!("at {n} phase points")));

    let failed = claims.iter().filter(|c| c.status == Status::Fail).count();
    report.drift = Some(drift);
    report.exit_code = i32::from(failed > 0);
    let mut lines: Vec<String> = claims.iter().map(Claim::line).collect();
    lines.push(if failed == 0 { "all claims hold".into() } else { format!("{failed} claim(s) failed") });
    report.claims = claims;

    let mut files = Vec::new();
    if let Some(dir) = out {
        write_file(dir, format!("{}.verify.json", scn.name), report.to_json().as_bytes(), &mut files)?;
    }
    Ok(CommandOutput { report, lines, files })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Direct,
    Linearize,
    Quadrature,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Direct, Method::Quadrature, Method::Linearize];

    pub fn name(self) -> &'static str {
        match self {
            Method::Direct => "direct",
            Method::Linearize => "linearize",
            Method::Quadrature => "quadrature",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == s)
    }

    fn solve(self, scn: &Scenario) -> Result<Trajectory, Error> {
        match self {
            Method::Direct => direct(scn),
            Method::Quadrature => solve_by_quadrature(&scn.model, &scn.initial, &scn.grid()),
            Method::Linearize => solve_by_linearisation(&scn.model, &scn.initial, &scn.grid()),
        }
    }
}

/// Parses a comma-separated method list.
pub fn parse_methods(list: &str) -> Result<Vec<Method>, CliError> {
    let mut methods = Vec::new();
    let mut errors = Vec::new();
    for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match Method::parse(item) {
            Some(m) if !methods.contains(&m) => methods.push(m),
            Some(_) => {}
            None => errors.push(format!("methods: unknown method \"{item}\" (expected direct, quadrature or linearize)")),
        }
    }
    if methods.is_empty() && errors.is_empty() {
        errors.push("methods: at least one method is required".into());
    }
    if errors.is_empty() {
        Ok(methods)
    } else {
        Err(CliError::Schema(errors))
    }
}

/// Runs each method on the scenario grid and reports pairwise differences.
pub fn compare(scn: &Scenario, methods: &[Method], out: &Path) -> Result<CommandOutput, CliError> {
    let mut runs: Vec<(Method, Result<Trajectory, Error>, f64)> = std::thread::scope(|scope| {
        let handles: Vec<_> = methods
            .iter()
            .map(|&method| {
                scope.spawn(move || {
                    let started = Instant::now();
                    let result = method.solve(scn);
                    (method, result, started.elapsed().as_secs_f64())
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("method thread panicked")).collect()
    });
    runs.sort_by_key(|r| r.0);

    let mut report = RunReport::new(&scn.name, "compare");
    report.samples = scn.samples;
    let mut lines = Vec::new();
    let mut timings = String::from("method,status,seconds\n");
    let mut errored = false;
    for (method, result, secs) in &runs {
        let (status, reason) = match result {
            Ok(_) => (MethodState::Ok, None),
            Err(e @ (Error::NotPointSymmetric | Error::NotLinearisable)) => (MethodState::Skipped, Some(e.to_string())),
            // separable methods only cover spans without an angular turning point
            Err(e @ Error::AngularTurning { .. }) => (MethodState::Skipped, Some(e.to_string())),
            Err(e) => {
                errored = true;
                (MethodState::Error, Some(e.to_string()))
            }
        };
        let label = match status {
            MethodState::Ok => "OK",
            MethodState::Skipped => "SKIPPED",
            MethodState::Error => "ERROR",
        };
        lines.push(match &reason {
            Some(r) => format!("{} {label} ({r})", method.name()),
            None => format!("{} {label} in {secs:.3} s", method.name()),
        });
        timings.push_str(&format!("{},{label},{}\n", method.name(), num(*secs)));
        report.methods.push(MethodStatus { method: method.name(), status, reason });
    }

    let ok: Vec<(Method, &Trajectory)> = runs.iter().filter_map(|(m, r, _)| r.as_ref().ok().map(|t| (*m, t))).collect();
    let mut pairs_csv = String::from("a,b,max_dx,max_dy\n");
    for (k, (ma, ta)) in ok.iter().enumerate() {
        for (mb, tb) in &ok[k + 1..] {
            let (mut dx, mut dy) = (0.0f64, 0.0f64);
            for (a, b) in ta.states().zip(tb.states()) {
                dx = dx.max((a.x - b.x).abs());
                dy = dy.max((a.y - b.y).abs());
            }
            lines.push(format!("{} vs {}: max |dx| {dx:.3e}, max |dy| {dy:.3e}", ma.name(), mb.name()));
            pairs_csv.push_str(&format!("{},{},{},{}\n", ma.name(), mb.name(), num(dx), num(dy)));
            report.pairs.push(PairError { a: ma.name(), b: mb.name(), max_dx: dx, max_dy: dy });
        }
    }
    report.exit_code = if errored { 3 } else { 0 };

    let mut files = Vec::new();
    write_file(out, format!("{}.compare.csv", scn.name), pairs_csv.as_bytes(), &mut files)?;
    write_file(out, format!("{}.timings.csv", scn.name), timings.as_bytes(), &mut files)?;
    write_file(out, format!("{}.compare.json", scn.name), report.to_json().as_bytes(), &mut files)?;
    Ok(CommandOutput { report, lines, files })
}
