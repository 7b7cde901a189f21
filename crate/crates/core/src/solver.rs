//! Solution of the point-symmetric family by quadratures.
//!
//! With `T = ∫ dt/ρ²` and `R̄ = R/ρ` the Noether invariant becomes the energy
//! `J = ½(dR̄/dT)² + W(R̄)`, `W = U + κI/R̄²`, and the Ermakov invariant gives
//! the separable angular law `dθ/dS = ±h(θ)` with `S = ∫ dT/R̄²`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

#[allow(unused_imports)]
use num_traits::Float;

use crate::dynamics::{IntegratorStats, Sample, Trajectory};
use crate::error::{Error, Result};
use crate::geometry::{CartesianState, PolarState};
use crate::invariants::{ermakov_i_cart, noether_j, radial};
use crate::linearize::{h_of_theta, radicand};
use crate::model::{ErmakovModel, PointSymmetric, UFunction};
use crate::quad::{self, Tolerance};
use crate::roots::{brent, safeguarded_newton};

const PANEL_TOL: Tolerance = Tolerance::new(1e-12, 1e-12);
const BOUNDED_PANELS: usize = 64;
/// Below this relative well width the motion is treated as harmonic.
const HARMONIC_WIDTH: f64 = 1e-6;
/// `sin²(φ/2)` below which the turning-point expansion replaces `J - W`.
const ENDPOINT_SWITCH: f64 = 1e-3;
const SCAN_FACTOR: f64 = 1.2;
const SCAN_RANGE: f64 = 1e6;

/// `T(t) = ∫_{t₀}^{t} dτ/ρ²(τ)`.
pub fn rescale_time(ps: &PointSymmetric, t0: f64, t: f64) -> Result<f64> {
    if ps.rho_is_constant() {
        let rho = ps.rho(t0)?;
        return Ok((t - t0) / (rho * rho));
    }
    ps.rho(t0)?;
    ps.rho(t)?;
    quad::integrate(
        |tau| {
            let rho = ps.rho(tau)?;
            Ok(1.0 / (rho * rho))
        },
        t0,
        t,
        Tolerance::new(1e-14, 1e-12),
    )
}

/// `W(R̄) = U(R̄) + κI/R̄²`.
#[derive(Debug, Clone)]
pub struct EffectivePotential {
    u: UFunction,
    kappa_i: f64,
}

impl EffectivePotential {
    pub fn new(m: &ErmakovModel, i: f64) -> Result<Self> {
        Ok(Self {
            u: m.require_point_symmetric()?.u().clone(),
            kappa_i: m.kappa() * i,
        })
    }

    pub fn value(&self, s: f64) -> Result<f64> {
        Ok(self.u.value(s)? + self.kappa_i / (s * s))
    }

    pub fn derivative(&self, s: f64) -> Result<f64> {
        Ok(self.u.derivative(s)? - 2.0 * self.kappa_i / (s * s * s))
    }

    pub fn second_derivative(&self, s: f64) -> Result<f64> {
        Ok(self.u.second_derivative(s)? + 6.0 * self.kappa_i / s.powi(4))
    }
}

/// `R̄`, `dR̄/dT` and `S = ∫₀^T dT'/R̄²` at one rescaled time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialPoint {
    pub rbar: f64,
    pub rbar_dot: f64,
    pub s: f64,
}

/// Cumulative `T` and `S` at the nodes of a monotone parameter.
#[derive(Debug, Clone, Default)]
struct Table {
    xi: Vec<f64>,
    t: Vec<f64>,
    s: Vec<f64>,
}

impl Table {
    fn panel(&self, t: f64) -> usize {
        let n = self.t.len();
        match self.t.binary_search_by(|probe| probe.partial_cmp(&t).unwrap()) {
            Ok(i) => i.min(n - 2),
            Err(i) => i.saturating_sub(1).min(n - 2),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Endpoint {
    at: f64,
    w1: f64,
    w2: f64,
    w3: f64,
}

#[derive(Debug, Clone)]
enum Shape {
    Constant { rbar: f64 },
    /// `R̄ = centre + amp cos(ω T + phase)`.
    Harmonic { centre: f64, amp: f64, omega: f64, phase: f64 },
    /// `R̄ = mid - half cos φ` between turning points `a < b`.
    Bounded { a: Endpoint, b: Endpoint, period: f64, s_period: f64 },
    /// `R̄ = base + u²`; `turning` when `base` is a turning point.
    Open { base: Endpoint, turning: bool },
}

/// Radial motion `R̄(T)` from the energy law.
#[derive(Debug, Clone)]
pub struct RadialSolution {
    w: EffectivePotential,
    j: f64,
    shape: Shape,
    table: Table,
    t_start: f64,
    s_start: f64,
    t_end: f64,
}

/// `u` with `R̄ = base + u²`; near the turning point `dR̄/dT = u√(2q)` fixes
/// `u` better than the position does.
fn open_u0(shape: &Shape, rbar: f64, v: f64) -> f64 {
    let Shape::Open { base, .. } = shape else {
        unreachable!("open parameter of a closed shape")
    };
    let u2 = (rbar - base.at).max(0.0);
    let sign = if v < 0.0 { -1.0 } else { 1.0 };
    if u2 < ENDPOINT_SWITCH * base.at {
        let q = -base.w1 - 0.5 * base.w2 * u2 - base.w3 * u2 * u2 / 6.0;
        if q > 0.0 {
            return v / (2.0 * q).sqrt();
        }
    }
    sign * u2.sqrt()
}

fn scan<F: FnMut(f64) -> Result<bool>>(from: f64, up: bool, mut stop: F) -> Result<Option<(f64, f64)>> {
    let factor = if up { SCAN_FACTOR } else { 1.0 / SCAN_FACTOR };
    let limit = if up { from * SCAN_RANGE } else { from / SCAN_RANGE };
    let mut prev = from;
    loop {
        let next = prev * factor;
        if stop(next)? {
            return Ok(Some((prev, next)));
        }
        if (up && next > limit) || (!up && next < limit) {
            return Ok(None);
        }
        prev = next;
    }
}

impl RadialSolution {
    fn g(&self, s: f64) -> Result<f64> {
        Ok(self.j - self.w.value(s)?)
    }

    fn endpoint(w: &EffectivePotential, at: f64) -> Result<Endpoint> {
        Ok(Endpoint {
            at,
            w1: w.derivative(at)?,
            w2: w.second_derivative(at)?,
            w3: {
                let d = 1e-4 * at;
                (w.second_derivative(at + d)? - w.second_derivative(at - d)?) / (2.0 * d)
            },
        })
    }

    pub fn turning_points(&self) -> Vec<f64> {
        match &self.shape {
            Shape::Bounded { a, b, .. } => vec![a.at, b.at],
            Shape::Open { base, turning: true } => vec![base.at],
            _ => Vec::new(),
        }
    }

    /// Radial period in `T`, when the motion is periodic.
    pub fn period(&self) -> Option<f64> {
        match &self.shape {
            Shape::Bounded { period, .. } => Some(*period),
            Shape::Harmonic { omega, .. } => Some(TAU / omega),
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.shape, Shape::Constant { .. })
    }

    fn rbar_of(&self, xi: f64) -> f64 {
        match &self.shape {
            Shape::Bounded { a, b, .. } => 0.5 * (a.at + b.at) - 0.5 * (b.at - a.at) * xi.cos(),
            Shape::Open { base, .. } => base.at + xi * xi,
            Shape::Constant { rbar } => *rbar,
            Shape::Harmonic { .. } => unreachable!("harmonic motion has no table"),
        }
    }

    /// `dT/dξ` for the table parameter.
    fn k(&self, xi: f64) -> Result<f64> {
        match &self.shape {
            Shape::Bounded { a, b, .. } => {
                let width = b.at - a.at;
                let half = 0.5 * width;
                let sa = (0.5 * xi).sin().powi(2);
                let sb = (0.5 * xi).cos().powi(2);
                let da = 2.0 * half * sa;
                let db = 2.0 * half * sb;
                let q = if sa < ENDPOINT_SWITCH {
                    (-a.w1 - 0.5 * a.w2 * da - a.w3 * da * da / 6.0) / (width - da)
                } else if sb < ENDPOINT_SWITCH {
                    (b.w1 - 0.5 * b.w2 * db + b.w3 * db * db / 6.0) / (width - db)
                } else {
                    self.g(a.at + da)? / (da * db)
                };
                if !(q > 0.0) {
                    return Err(Error::NoTurningPoint("inside a well that is not single-welled"));
                }
                Ok(1.0 / (2.0 * q).sqrt())
            }
            Shape::Open { base, turning } => {
                let u2 = xi * xi;
                if *turning {
                    let q = if u2 < ENDPOINT_SWITCH * base.at {
                        -base.w1 - 0.5 * base.w2 * u2 - base.w3 * u2 * u2 / 6.0
                    } else {
                        self.g(base.at + u2)? / u2
                    };
                    if !(q > 0.0) {
                        return Err(Error::NoTurningPoint("open branch re-enters a forbidden region"));
                    }
                    Ok(2.0 / (2.0 * q).sqrt())
                } else {
                    let g = self.g(base.at + u2)?;
                    if !(g > 0.0) {
                        return Err(Error::NoTurningPoint("open branch re-enters a forbidden region"));
                    }
                    Ok(2.0 * xi.abs() / (2.0 * g).sqrt())
                }
            }
            _ => unreachable!("no table for this shape"),
        }
    }

    fn sk(&self, xi: f64) -> Result<f64> {
        let r = self.rbar_of(xi);
        Ok(self.k(xi)? / (r * r))
    }

    fn panel_integral(&self, a: f64, b: f64, s_weight: bool) -> Result<f64> {
        if s_weight {
            quad::integrate(|x| self.sk(x), a, b, PANEL_TOL)
        } else {
            quad::integrate(|x| self.k(x), a, b, PANEL_TOL)
        }
    }

    fn push_node(&mut self, xi: f64) -> Result<()> {
        let last = *self.table.xi.last().unwrap();
        let dt = self.panel_integral(last, xi, false)?;
        let ds = self.panel_integral(last, xi, true)?;
        let t = self.table.t.last().unwrap() + dt;
        let s = self.table.s.last().unwrap() + ds;
        self.table.xi.push(xi);
        self.table.t.push(t);
        self.table.s.push(s);
        Ok(())
    }

    /// `(T, S)` at a parameter inside the table.
    fn table_at(&self, xi: f64) -> Result<(f64, f64)> {
        let tab = &self.table;
        let i = match tab.xi.binary_search_by(|p| p.partial_cmp(&xi).unwrap()) {
            Ok(i) => return Ok((tab.t[i], tab.s[i])),
            Err(i) => i.saturating_sub(1).min(tab.xi.len() - 2),
        };
        Ok((
            tab.t[i] + self.panel_integral(tab.xi[i], xi, false)?,
            tab.s[i] + self.panel_integral(tab.xi[i], xi, true)?,
        ))
    }

    fn invert_table(&self, t: f64) -> Result<f64> {
        let tab = &self.table;
        let i = tab.panel(t);
        let (lo, hi) = (tab.xi[i], tab.xi[i + 1]);
        if t <= tab.t[i] {
            return Ok(lo);
        }
        if t >= tab.t[i + 1] {
            return Ok(hi);
        }
        let base = tab.t[i];
        safeguarded_newton(
            |xi| Ok((base + self.panel_integral(lo, xi, false)? - t, self.k(xi)?)),
            lo,
            hi,
            1e-15 * hi.abs().max(1.0),
        )
    }

    /// Phase `φ ∈ [0, 2π)` of `(R̄, dR̄/dT)` on the bounded branch. Near a turning
    /// point the position fixes `φ` only through a square root, so the
    /// velocity is used there instead.
    fn bounded_phase(&self, rbar: f64, v: f64) -> Result<f64> {
        let Shape::Bounded { a, b, .. } = &self.shape else {
            unreachable!("phase of a non-bounded shape")
        };
        let width = b.at - a.at;
        let half = 0.5 * width;
        let mut phi = 2.0 * (rbar - a.at).max(0.0).sqrt().atan2((b.at - rbar).max(0.0).sqrt());
        let sa = (rbar - a.at).max(0.0) / width;
        let sb = (b.at - rbar).max(0.0) / width;
        if sa.min(sb) < ENDPOINT_SWITCH {
            let q = if sa < sb {
                let da = sa * width;
                (-a.w1 - 0.5 * a.w2 * da - a.w3 * da * da / 6.0) / (width - da)
            } else {
                let db = sb * width;
                (b.w1 - 0.5 * b.w2 * db + b.w3 * db * db / 6.0) / (width - db)
            };
            let from_v = (v.abs() / (half * (2.0 * q).sqrt())).min(1.0).asin();
            phi = if sa < sb { from_v } else { PI - from_v };
        }
        Ok(if v < 0.0 { (TAU - phi) % TAU } else { phi })
    }

    fn bounded_t_s(&self, phi: f64, period: f64, s_period: f64) -> Result<(f64, f64)> {
        let n = (phi / TAU).floor();
        let r = phi - n * TAU;
        let (t, s) = if r <= PI {
            self.table_at(r)?
        } else {
            let (t, s) = self.table_at(TAU - r)?;
            (period - t, s_period - s)
        };
        Ok((n * period + t, n * s_period + s))
    }

    fn bounded_phi(&self, t: f64, period: f64) -> Result<f64> {
        let n = (t / period).floor();
        let r = t - n * period;
        let phi = if r <= 0.5 * period {
            self.invert_table(r)?
        } else {
            TAU - self.invert_table(period - r)?
        };
        Ok(n * TAU + phi)
    }

    /// State of the radial motion `T` after the start.
    pub fn eval(&self, t: f64) -> Result<RadialPoint> {
        match &self.shape {
            Shape::Constant { rbar } => Ok(RadialPoint {
                rbar: *rbar,
                rbar_dot: 0.0,
                s: t / (rbar * rbar),
            }),
            Shape::Harmonic { centre, amp, omega, phase } => {
                let (c, a, w, p) = (*centre, *amp, *omega, *phase);
                let s = quad::integrate(|x| Ok((c + a * (w * x + p).cos()).powi(-2)), 0.0, t, PANEL_TOL)?;
                Ok(RadialPoint {
                    rbar: c + a * (w * t + p).cos(),
                    rbar_dot: -a * w * (w * t + p).sin(),
                    s,
                })
            }
            Shape::Bounded { a, b, period, s_period, .. } => {
                let phi = self.bounded_phi(self.t_start + t, *period)?;
                let (_, s) = self.bounded_t_s(phi, *period, *s_period)?;
                let half = 0.5 * (b.at - a.at);
                Ok(RadialPoint {
                    rbar: self.rbar_of(phi),
                    rbar_dot: half * phi.sin() / self.k(phi)?,
                    s: (s - self.s_start).max(0.0),
                })
            }
            Shape::Open { .. } => {
                if t > *self.table.t.last().unwrap() {
                    return Err(Error::NoTurningPoint("radial motion escapes before the end of the span"));
                }
                let u = self.invert_table(t)?;
                let (_, s) = self.table_at(u)?;
                let rbar = self.rbar_of(u);
                let g = self.g(rbar)?.max(0.0);
                Ok(RadialPoint {
                    rbar,
                    rbar_dot: u.signum() * (2.0 * g).sqrt(),
                    s,
                })
            }
        }
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }
}

/// Solves `J = ½(dR̄/dT)² + W(R̄)` from `R̄(0) = rbar0`, `dR̄/dT(0) = v0`
/// for `T ∈ [0, t_end]`.
pub fn solve_radial(m: &ErmakovModel, i: f64, j: f64, rbar0: f64, v0: f64, t_end: f64) -> Result<RadialSolution> {
    if !(rbar0 > 0.0 && rbar0.is_finite() && v0.is_finite() && t_end >= 0.0) {
        return Err(Error::InvalidArgument("radial initial data must be finite with positive radius"));
    }
    let w = EffectivePotential::new(m, i)?;
    let mut sol = RadialSolution {
        w,
        j,
        shape: Shape::Constant { rbar: rbar0 },
        table: Table::default(),
        t_start: 0.0,
        s_start: 0.0,
        t_end,
    };
    let scale = j.abs().max(sol.w.value(rbar0)?.abs()).max(1.0);
    let g0 = sol.g(rbar0)?;
    let kinetic = 0.5 * v0 * v0;
    if g0 < -1e-10 * scale {
        return Err(Error::ForbiddenRegion { r: rbar0, deficit: g0 });
    }
    if (g0 - kinetic).abs() > 1e-10 * scale {
        return Err(Error::InconsistentEnergy { expected: g0, found: kinetic });
    }
    let xtol = |s: f64| 1e-15 * s;

    // bottom of the well containing rbar0
    let w1 = sol.w.derivative(rbar0)?;
    let bottom = if w1 == 0.0 {
        Some(rbar0)
    } else {
        let up = w1 < 0.0;
        match scan(rbar0, up, |s| Ok(sol.w.derivative(s)?.signum() != w1.signum()))? {
            Some((p, q)) => Some(brent(|s| sol.w.derivative(s), p, q, xtol(p.min(q)))?),
            None => None,
        }
    };

    let Some(bottom) = bottom else {
        // no minimum on the downhill side: the motion is open
        if w1 > 0.0 {
            return Err(Error::NoTurningPoint("radial motion collapses to the origin"));
        }
        let lower = scan(rbar0, false, |s| Ok(sol.g(s)? < 0.0))?;
        return match lower {
            Some((p, q)) => {
                let a = brent(|s| sol.g(s), q, p, xtol(q))?.min(rbar0);
                sol.shape = Shape::Open { base: RadialSolution::endpoint(&sol.w, a)?, turning: true };
                let u0 = open_u0(&sol.shape, rbar0, v0);
                sol.build_open(u0, t_end)?;
                Ok(sol)
            }
            None if v0 >= 0.0 => {
                sol.shape = Shape::Open { base: RadialSolution::endpoint(&sol.w, rbar0)?, turning: false };
                sol.build_open(0.0, t_end)?;
                Ok(sol)
            }
            None => Err(Error::NoTurningPoint("radial motion collapses to the origin")),
        };
    };

    let g_bottom = sol.g(bottom)?;
    let lower = scan(bottom, false, |s| Ok(sol.g(s)? < 0.0))?;
    let upper = scan(bottom, true, |s| Ok(sol.g(s)? < 0.0))?;
    let Some((lp, lq)) = lower else {
        return Err(Error::NoTurningPoint("radial motion collapses to the origin"));
    };
    let root = |p: f64, q: f64| -> Result<f64> {
        if g_bottom <= 0.0 {
            Ok(bottom)
        } else {
            brent(|s| sol.g(s), p, q, xtol(p.min(q)))
        }
    };
    let a = if lp == bottom { root(lq, lp)? } else { brent(|s| sol.g(s), lq, lp, xtol(lq))? };
    let Some((up, uq)) = upper else {
        // open above: turn at the lower root and escape
        sol.shape = Shape::Open { base: RadialSolution::endpoint(&sol.w, a)?, turning: true };
        let u0 = open_u0(&sol.shape, rbar0, v0);
        sol.build_open(u0, t_end)?;
        return Ok(sol);
    };
    let b = if up == bottom { root(up, uq)? } else { brent(|s| sol.g(s), up, uq, xtol(up))? };
    let (a, b) = (a.min(rbar0), b.max(rbar0));

    if b - a <= HARMONIC_WIDTH * bottom {
        let omega_sq = sol.w.second_derivative(bottom)?;
        let offset = rbar0 - bottom;
        if !(omega_sq > 0.0) || (offset == 0.0 && v0 == 0.0) {
            sol.shape = Shape::Constant { rbar: rbar0 };
            return Ok(sol);
        }
        let omega = omega_sq.sqrt();
        let amp = (offset * offset + (v0 / omega).powi(2)).sqrt();
        sol.shape = Shape::Harmonic {
            centre: bottom,
            amp,
            omega,
            phase: (-v0 / omega).atan2(offset),
        };
        return Ok(sol);
    }

    sol.shape = Shape::Bounded {
        a: RadialSolution::endpoint(&sol.w, a)?,
        b: RadialSolution::endpoint(&sol.w, b)?,
        period: 0.0,
        s_period: 0.0,
    };
    sol.table = Table { xi: vec![0.0], t: vec![0.0], s: vec![0.0] };
    for k in 1..=BOUNDED_PANELS {
        sol.push_node(PI * k as f64 / BOUNDED_PANELS as f64)?;
    }
    let period = 2.0 * sol.table.t.last().unwrap();
    let s_period = 2.0 * sol.table.s.last().unwrap();
    let phi0 = sol.bounded_phase(rbar0, v0)?;
    let (t_start, s_start) = sol.bounded_t_s(phi0, period, s_period)?;
    sol.shape = Shape::Bounded {
        a: RadialSolution::endpoint(&sol.w, a)?,
        b: RadialSolution::endpoint(&sol.w, b)?,
        period,
        s_period,
    };
    sol.t_start = t_start;
    sol.s_start = s_start;
    Ok(sol)
}

impl RadialSolution {
    /// Tabulates the open branch from `u0` until `T` covers `t_end`.
    fn build_open(&mut self, u0: f64, t_end: f64) -> Result<()> {
        let base = match &self.shape {
            Shape::Open { base, .. } => base.at,
            _ => unreachable!(),
        };
        self.table = Table { xi: vec![u0], t: vec![0.0], s: vec![0.0] };
        let unit = base.sqrt().max(1e-3);
        let mut u = u0;
        while *self.table.t.last().unwrap() < t_end {
            u += 0.05 * u.abs().max(0.5 * unit);
            if base + u * u > base * 1e12 + 1e12 {
                break;
            }
            self.push_node(u)?;
        }
        Ok(())
    }
}

/// Angular motion `θ(S)` from `dθ/dS = sign·h(θ)`.
#[derive(Debug, Clone)]
pub struct AngularSolution<'a> {
    m: &'a ErmakovModel,
    i: f64,
    sign: f64,
    theta0: f64,
    /// `h` when it does not depend on `θ`.
    uniform: Option<f64>,
    theta: Vec<f64>,
    big_theta: Vec<f64>,
    turning: Option<f64>,
}

const ANGULAR_STEP: f64 = 0.05;

impl<'a> AngularSolution<'a> {
    pub fn new(m: &'a ErmakovModel, i: f64, theta0: f64, sign: f64) -> Result<Self> {
        let form = m.form();
        let uniform = if m.is_decoupled() && form.b() == 0.0 && form.a() == form.c() {
            Some(h_of_theta(theta0, i, m)?)
        } else {
            None
        };
        if uniform.is_none() && !(h_of_theta(theta0, i, m)? > 0.0) {
            return Err(Error::AngularTurning { theta: theta0 });
        }
        Ok(Self {
            m,
            i,
            sign: if sign < 0.0 { -1.0 } else { 1.0 },
            theta0,
            uniform,
            theta: vec![theta0],
            big_theta: vec![0.0],
            turning: None,
        })
    }

    fn inv_h(&self, theta: f64) -> Result<f64> {
        Ok(1.0 / h_of_theta(theta, self.i, self.m)?)
    }

    fn segment(&self, from: f64, to: f64) -> Result<f64> {
        Ok(self.sign * quad::integrate(|th| self.inv_h(th), from, to, PANEL_TOL)?)
    }

    fn allowed(&self, theta: f64) -> bool {
        matches!(radicand(theta, self.i, self.m), Ok(r) if r > 0.0)
    }

    fn extend(&mut self) -> Result<()> {
        if let Some(theta) = self.turning {
            return Err(Error::AngularTurning { theta });
        }
        let last = *self.theta.last().unwrap();
        let mut step = ANGULAR_STEP;
        while !self.allowed(last + self.sign * step) {
            step *= 0.5;
            if step < 1e-7 {
                let edge = brent(
                    |th| Ok(radicand(th, self.i, self.m).unwrap_or(-1.0)),
                    last,
                    last + self.sign * 2.0 * step,
                    1e-14,
                )?;
                self.turning = Some(edge);
                return Err(Error::AngularTurning { theta: edge });
            }
        }
        let next = last + self.sign * step;
        let value = self.big_theta.last().unwrap() + self.segment(last, next)?;
        self.theta.push(next);
        self.big_theta.push(value);
        Ok(())
    }

    /// `θ` with `Θ(θ) = ∫_{θ₀}^{θ} dθ'/h = S`.
    pub fn theta_at(&mut self, s: f64) -> Result<f64> {
        if let Some(h) = self.uniform {
            return Ok(self.theta0 + self.sign * h * s);
        }
        if s < 0.0 {
            return Err(Error::InvalidArgument("S must be non-negative"));
        }
        while *self.big_theta.last().unwrap() < s {
            self.extend()?;
        }
        let i = match self.big_theta.binary_search_by(|p| p.partial_cmp(&s).unwrap()) {
            Ok(i) => return Ok(self.theta[i]),
            Err(i) => i - 1,
        };
        let (lo, hi) = (self.theta[i], self.theta[i + 1]);
        let base = self.big_theta[i];
        let sign = self.sign;
        safeguarded_newton(
            |th| Ok((base + self.segment(lo, th)? - s, sign * self.inv_h(th)?)),
            lo.min(hi),
            lo.max(hi),
            1e-15,
        )
    }

    /// `dθ/dS` at `θ`.
    pub fn rate(&self, theta: f64) -> Result<f64> {
        Ok(self.sign * self.uniform.map_or_else(|| h_of_theta(theta, self.i, self.m), Ok)?)
    }
}

/// Convenience wrapper: `θ` at each `S` of a non-decreasing sequence.
pub fn solve_angular(m: &ErmakovModel, i: f64, theta0: f64, sign: f64, s_values: &[f64]) -> Result<Vec<f64>> {
    let mut ang = AngularSolution::new(m, i, theta0, sign)?;
    s_values.iter().map(|&s| ang.theta_at(s)).collect()
}

/// Reassembles the Cartesian trajectory at `times` (non-decreasing, starting
/// no earlier than `init.t`) from the quadrature solution.
pub fn solve_by_quadrature(m: &ErmakovModel, init: &CartesianState, times: &[f64]) -> Result<Trajectory> {
    let ps = m.require_point_symmetric()?;
    if times.windows(2).any(|w| w[1] < w[0]) || times.first().is_some_and(|&t| t < init.t) {
        return Err(Error::InvalidArgument("quadrature sample times must be non-decreasing from the initial time"));
    }
    let i = ermakov_i_cart(init, m)?;
    let j = noether_j(init, m)?;
    let jet = ps.jet(init.t)?;
    let (r0, r_dot0) = radial(init, m)?;
    let rbar0 = r0 / jet.rho;
    let v0 = jet.rho * (r_dot0 - jet.d1 * rbar0);

    let mut rescaled = Vec::with_capacity(times.len());
    let mut prev = (init.t, 0.0);
    for &t in times {
        let big_t = prev.1 + rescale_time(ps, prev.0, t)?;
        rescaled.push(big_t);
        prev = (t, big_t);
    }
    let t_end = rescaled.last().copied().unwrap_or(0.0);
    let radial_sol = solve_radial(m, i, j, rbar0, v0, t_end)?;

    let theta0 = init.y.atan2(init.x);
    let l = init.angular_momentum();
    let fixed_angle = l == 0.0 && m.is_decoupled();
    let mut angular = if fixed_angle { None } else { Some(AngularSolution::new(m, i, theta0, l)?) };

    let mut samples = Vec::with_capacity(times.len());
    for (&t, &big_t) in times.iter().zip(&rescaled) {
        let rp = radial_sol.eval(big_t)?;
        let (theta, rate) = match angular.as_mut() {
            Some(a) => {
                let theta = a.theta_at(rp.s)?;
                (theta, a.rate(theta)?)
            }
            None => (theta0, 0.0),
        };
        let jet = ps.jet(t)?;
        let r = jet.rho * rp.rbar;
        let polar = PolarState {
            r,
            theta,
            r_dot: jet.d1 * rp.rbar + rp.rbar_dot / jet.rho,
            theta_dot: rate / (r * r),
            t,
        };
        samples.push(Sample::new(m.form().from_polar(&polar)?, m)?);
    }
    Ok(Trajectory {
        samples,
        stats: IntegratorStats::default(),
    })
}
