//! Equations of motion and their adaptive integration with invariant
//! monitoring.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::geometry::CartesianState;
use crate::invariants::{ermakov_i_cart, hamiltonian, noether_j};
use crate::model::ErmakovModel;
use crate::ode::{self, Control, Dopri5Config};

pub const DEFAULT_AXIS_GUARD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// `0` leaves the step unbounded.
    pub max_step: f64,
    /// Sample on a grid by interpolation instead of recording accepted steps.
    pub dense_output: bool,
    pub axis_guard: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: 0.0,
            dense_output: false,
            axis_guard: DEFAULT_AXIS_GUARD,
        }
    }
}

impl IntegratorConfig {
    pub fn with_tolerance(tol: f64) -> Self {
        Self {
            rel_tol: tol,
            abs_tol: tol * 1e-2,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::InvalidArgument("tolerances must be positive"));
        }
        if !(self.max_step >= 0.0 && self.axis_guard >= 0.0) {
            return Err(Error::InvalidArgument("max_step and axis_guard must be non-negative"));
        }
        Ok(())
    }

    fn ode(&self) -> Dopri5Config {
        Dopri5Config {
            rtol: self.rel_tol,
            atol: self.abs_tol,
            h_max: self.max_step,
            ..Dopri5Config::default()
        }
    }
}

/// Rejects states within `guard·r` of a singular axis.
pub fn check_axes(x: f64, y: f64, m: &ErmakovModel, guard: f64) -> Result<()> {
    let r = x.hypot(y);
    if (m.x_zero_is_singular() && x.abs() < guard * r) || (m.y_zero_is_singular() && y.abs() < guard * r) {
        return Err(Error::AxisSingularity { x, y });
    }
    Ok(())
}

/// `(ẍ, ÿ) = -ω² (x, y) + (f(y/x)/(y x²), g(x/y)/(x y²))`.
pub fn eom_rhs(s: &CartesianState, m: &ErmakovModel) -> Result<[f64; 2]> {
    eom_rhs_guarded(s, m, DEFAULT_AXIS_GUARD)
}

pub fn eom_rhs_guarded(s: &CartesianState, m: &ErmakovModel, guard: f64) -> Result<[f64; 2]> {
    check_axes(s.x, s.y, m, guard)?;
    let r2 = m.form().r_sq(s.x, s.y);
    if !(r2 > 0.0) {
        return Err(Error::DegenerateDirection { theta: s.y.atan2(s.x) });
    }
    let r = r2.sqrt();
    let theta = s.y.atan2(s.x);
    let omega_sq = m.omega_sq(r, theta, s.t)?;
    let coupling = m.coupling_forces(s.x, s.y)?;
    Ok([-omega_sq * s.x + coupling[0], -omega_sq * s.y + coupling[1]])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub state: CartesianState,
    pub i: f64,
    pub j: Option<f64>,
    pub h: Option<f64>,
}

impl Sample {
    pub fn new(state: CartesianState, m: &ErmakovModel) -> Result<Self> {
        let ps = m.point_symmetric().is_some();
        Ok(Self {
            state,
            i: ermakov_i_cart(&state, m)?,
            j: if ps { Some(noether_j(&state, m)?) } else { None },
            h: if ps { Some(hamiltonian(&state, m)?) } else { None },
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IntegratorStats {
    pub steps: usize,
    pub rejections: usize,
    pub evaluations: usize,
}

/// Samples ordered along the direction of integration.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub stats: IntegratorStats,
}

impl Trajectory {
    pub fn first(&self) -> Option<&Sample> {
        self.samples.first()
    }

    pub fn last(&self) -> Option<&Sample> {
        self.samples.last()
    }

    pub fn states(&self) -> impl Iterator<Item = &CartesianState> {
        self.samples.iter().map(|s| &s.state)
    }

    pub fn drift_report(&self) -> DriftReport {
        drift_report(self)
    }
}

/// Largest relative departure of a series from its first value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Drift {
    pub max_rel: f64,
    pub at: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftReport {
    pub i: Drift,
    pub j: Option<Drift>,
    pub h: Option<Drift>,
}

/// `max |Q(t) - Q(t₀)| / max(1, |Q(t₀)|)` and the time where it occurs.
pub fn drift<I: IntoIterator<Item = (f64, f64)>>(series: I) -> Drift {
    let mut it = series.into_iter();
    let Some((t0, q0)) = it.next() else {
        return Drift { max_rel: 0.0, at: 0.0 };
    };
    let scale = q0.abs().max(1.0);
    let mut out = Drift { max_rel: 0.0, at: t0 };
    for (t, q) in it {
        let rel = (q - q0).abs() / scale;
        if rel > out.max_rel || rel.is_nan() {
            out = Drift { max_rel: rel, at: t };
        }
    }
    out
}

pub fn drift_report(tr: &Trajectory) -> DriftReport {
    let pick = |f: fn(&Sample) -> Option<f64>| -> Option<Drift> {
        let series: Option<Vec<(f64, f64)>> = tr.samples.iter().map(|s| f(s).map(|q| (s.state.t, q))).collect();
        series.map(drift)
    };
    DriftReport {
        i: drift(tr.samples.iter().map(|s| (s.state.t, s.i))),
        j: pick(|s| s.j),
        h: pick(|s| s.h),
    }
}

fn pack(s: &CartesianState) -> [f64; 4] {
    [s.x, s.y, s.x_dot, s.y_dot]
}

fn unpack(t: f64, y: &[f64; 4]) -> CartesianState {
    CartesianState::new(y[0], y[1], y[2], y[3], t)
}

fn rhs<'a>(m: &'a ErmakovModel, guard: f64) -> impl FnMut(f64, &[f64; 4]) -> Result<[f64; 4]> + 'a {
    move |t, y| {
        let a = eom_rhs_guarded(&unpack(t, y), m, guard)?;
        Ok([y[2], y[3], a[0], a[1]])
    }
}

fn check_init(init: &CartesianState, m: &ErmakovModel, cfg: &IntegratorConfig) -> Result<()> {
    cfg.validate()?;
    if !init.is_finite() {
        return Err(Error::InvalidArgument("initial state must be finite"));
    }
    eom_rhs_guarded(init, m, cfg.axis_guard).map(|_| ())
}

/// Integrates from `init.t` to `t_end`, recording every accepted step (or
/// `samples` evenly spaced points when `cfg.dense_output` is set).
pub fn integrate(m: &ErmakovModel, init: &CartesianState, t_end: f64, cfg: &IntegratorConfig) -> Result<Trajectory> {
    if cfg.dense_output {
        let n = 200;
        let times: Vec<f64> = (0..=n).map(|k| init.t + (t_end - init.t) * k as f64 / n as f64).collect();
        return integrate_sampled(m, init, &times, cfg);
    }
    check_init(init, m, cfg)?;
    let mut samples = alloc::vec![Sample::new(*init, m)?];
    let out = ode::integrate(rhs(m, cfg.axis_guard), init.t, pack(init), t_end, &cfg.ode(), |step| {
        samples.push(Sample::new(unpack(step.t1, &step.y1), m)?);
        Ok(Control::Continue)
    })?;
    Ok(Trajectory {
        samples,
        stats: IntegratorStats {
            steps: out.accepted,
            rejections: out.rejected,
            evaluations: out.evaluations,
        },
    })
}

/// Integrates from `init.t` and samples at `times` by dense output.
pub fn integrate_sampled(
    m: &ErmakovModel,
    init: &CartesianState,
    times: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    check_init(init, m, cfg)?;
    let mut samples = Vec::with_capacity(times.len());
    let mut stats = IntegratorStats::default();
    let mut next = 0;
    while next < times.len() && times[next] == init.t {
        samples.push(Sample::new(*init, m)?);
        next += 1;
    }
    if let Some(&t_end) = times.last() {
        let out = ode::integrate(rhs(m, cfg.axis_guard), init.t, pack(init), t_end, &cfg.ode(), |step| {
            while next < times.len() && step.contains(times[next]) {
                let t = times[next];
                let y = if t == step.t1 { step.y1 } else { step.eval(t) };
                samples.push(Sample::new(unpack(t, &y), m)?);
                next += 1;
            }
            Ok(Control::Continue)
        })?;
        stats = IntegratorStats {
            steps: out.accepted,
            rejections: out.rejected,
            evaluations: out.evaluations,
        };
    }
    if samples.len() != times.len() {
        return Err(Error::InvalidArgument("sample times must be monotone and start at the initial time"));
    }
    Ok(Trajectory { samples, stats })
}

/// Final state only, without invariant bookkeeping.
pub fn propagate(m: &ErmakovModel, init: &CartesianState, t_end: f64, cfg: &IntegratorConfig) -> Result<CartesianState> {
    check_init(init, m, cfg)?;
    let out = ode::integrate(rhs(m, cfg.axis_guard), init.t, pack(init), t_end, &cfg.ode(), |_| {
        Ok(Control::Continue)
    })?;
    Ok(unpack(out.t, &out.y))
}
