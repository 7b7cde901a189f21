//! Linearisation of the point-symmetric family in the variables
//! `φ = α(t)/R` and `θ`:
//!
//! `h² φ'' + h h_θ φ' + 2(κI + a) φ = b`,
//!
//! possible only for `U = a/s² - b/s` (with `α = ρ`) or `U = a/s² + c s²/2`
//! (with `α̈ + (c/ρ³ - ρ̈) α/ρ = 0`, `b = 0`).

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::dynamics::{eom_rhs, IntegratorStats, Sample, Trajectory};
use crate::error::{Error, Result};
use crate::geometry::{CartesianState, PolarState};
use crate::invariants::{ermakov_i_cart, radial};
use crate::model::{ErmakovModel, PointSymmetric, USpec, AXIS_EPS};
use crate::ode::{self, Control, Dopri5Config, Step};
use crate::quad::{self, Tolerance};
use crate::roots::brent;
use crate::solver::rescale_time;

/// Fit tolerance relative to `max(1, |U|)`.
pub const FIT_TOL: f64 = 1e-9;
const FIT_POINTS: usize = 32;
const FIT_RANGE: (f64, f64) = (0.2, 5.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinearisableClass {
    /// `U = a/s² - b/s`.
    U1 { a: f64, b: f64 },
    /// `U = a/s² + c s²/2`.
    U2 { a: f64, c: f64 },
    NotLinearisable,
}

impl LinearisableClass {
    /// `(a, b)` of the linear equation.
    pub fn coefficients(&self) -> Result<(f64, f64)> {
        match *self {
            LinearisableClass::U1 { a, b } => Ok((a, b)),
            LinearisableClass::U2 { a, .. } => Ok((a, 0.0)),
            LinearisableClass::NotLinearisable => Err(Error::NotLinearisable),
        }
    }

    pub fn is_linearisable(&self) -> bool {
        !matches!(self, LinearisableClass::NotLinearisable)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classification {
    pub class: LinearisableClass,
    /// Largest scaled fit residual (`0` for parametric potentials).
    pub residual: f64,
}

/// Least-squares fit of `u` against two basis functions; returns the
/// coefficients and the largest scaled residual.
fn fit(samples: &[(f64, f64)], b1: fn(f64) -> f64, b2: fn(f64) -> f64) -> ([f64; 2], f64) {
    // modified Gram–Schmidt on the 32×2 design matrix
    let col1: Vec<f64> = samples.iter().map(|&(s, _)| b1(s)).collect();
    let col2: Vec<f64> = samples.iter().map(|&(s, _)| b2(s)).collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let r11 = dot(&col1, &col1).sqrt();
    let q1: Vec<f64> = col1.iter().map(|v| v / r11).collect();
    let r12 = dot(&q1, &col2);
    let w: Vec<f64> = col2.iter().zip(&q1).map(|(v, q)| v - r12 * q).collect();
    let r22 = dot(&w, &w).sqrt();
    let q2: Vec<f64> = w.iter().map(|v| v / r22).collect();
    let u: Vec<f64> = samples.iter().map(|&(_, u)| u).collect();
    let z1 = dot(&q1, &u);
    let z2 = dot(&q2, &u);
    let c2 = z2 / r22;
    let c1 = (z1 - r12 * c2) / r11;
    let residual = samples
        .iter()
        .map(|&(s, u)| (u - c1 * b1(s) - c2 * b2(s)).abs() / u.abs().max(1.0))
        .fold(0.0, f64::max);
    ([c1, c2], residual)
}

/// Decides whether the model's `U` lies in one of the two linearisable families.
pub fn classify_linearisable(m: &ErmakovModel) -> Result<Classification> {
    let ps = m.require_point_symmetric()?;
    match ps.u_spec() {
        USpec::InverseSquareCoulomb { a, b } => {
            return Ok(Classification {
                class: LinearisableClass::U1 { a: *a, b: *b },
                residual: 0.0,
            })
        }
        USpec::InverseSquareHarmonic { a, c } => {
            return Ok(Classification {
                class: LinearisableClass::U2 { a: *a, c: *c },
                residual: 0.0,
            })
        }
        USpec::Expr(_) => {}
    }
    let (lo, hi) = FIT_RANGE;
    let mut samples = Vec::with_capacity(FIT_POINTS);
    for k in 0..FIT_POINTS {
        let s = lo * (hi / lo).powf(k as f64 / (FIT_POINTS - 1) as f64);
        match ps.u().value(s) {
            Ok(u) if u.is_finite() => samples.push((s, u)),
            _ => {
                return Ok(Classification {
                    class: LinearisableClass::NotLinearisable,
                    residual: f64::INFINITY,
                })
            }
        }
    }
    let inv_sq = |s: f64| 1.0 / (s * s);
    let (p1, r1) = fit(&samples, inv_sq, |s| -1.0 / s);
    let (p2, r2) = fit(&samples, inv_sq, |s| 0.5 * s * s);
    Ok(if r1 <= FIT_TOL {
        Classification {
            class: LinearisableClass::U1 { a: p1[0], b: p1[1] },
            residual: r1,
        }
    } else if r2 <= FIT_TOL {
        Classification {
            class: LinearisableClass::U2 { a: p2[0], c: p2[1] },
            residual: r2,
        }
    } else {
        Classification {
            class: LinearisableClass::NotLinearisable,
            residual: r1.min(r2),
        }
    })
}

/// `I - F(tan θ) - G(cot θ)`.
pub fn radicand(theta: f64, i: f64, m: &ErmakovModel) -> Result<f64> {
    let (s, c) = theta.sin_cos();
    let mut rad = i;
    if !m.f_is_zero() {
        if c.abs() < AXIS_EPS {
            return Err(Error::AxisSingularity { x: c, y: s });
        }
        rad -= m.big_f().eval(s / c)?;
    }
    if !m.g_is_zero() {
        if s.abs() < AXIS_EPS {
            return Err(Error::AxisSingularity { x: c, y: s });
        }
        rad -= m.big_g().eval(c / s)?;
    }
    Ok(rad)
}

/// `h(θ; I) = √2 ψ⁻²(θ) √(I - F(tan θ) - G(cot θ))`.
pub fn h_of_theta(theta: f64, i: f64, m: &ErmakovModel) -> Result<f64> {
    let rad = radicand(theta, i, m)?;
    if rad < 0.0 {
        return Err(Error::AngularTurning { theta });
    }
    let d = m.form().direction(theta);
    if !(d > 0.0) {
        return Err(Error::DegenerateDirection { theta });
    }
    Ok(core::f64::consts::SQRT_2 * d * rad.sqrt())
}

/// `h` and `∂h/∂θ`.
pub fn h_and_derivative(theta: f64, i: f64, m: &ErmakovModel) -> Result<(f64, f64)> {
    let rad = radicand(theta, i, m)?;
    if !(rad > 0.0) {
        return Err(Error::AngularTurning { theta });
    }
    let form = m.form();
    let d = form.direction(theta);
    if !(d > 0.0) {
        return Err(Error::DegenerateDirection { theta });
    }
    let (s, c) = theta.sin_cos();
    let mut rad_prime = 0.0;
    if !m.f_is_zero() {
        rad_prime -= m.big_f().derivative(s / c)? / (c * c);
    }
    if !m.g_is_zero() {
        rad_prime += m.big_g().derivative(c / s)? / (s * s);
    }
    let root = rad.sqrt();
    let h = core::f64::consts::SQRT_2 * d * root;
    let dh = core::f64::consts::SQRT_2 * (form.direction_derivative(theta) * root + d * rad_prime / (2.0 * root));
    Ok((h, dh))
}

/// `α`, `α̇`, `α̈` at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaJet {
    pub alpha: f64,
    pub d1: f64,
    pub d2: f64,
}

/// The time function of `φ = α/R`.
#[derive(Debug, Clone)]
pub enum AlphaFunction<'a> {
    /// `α = ρ`.
    Rho { ps: &'a PointSymmetric, t0: f64 },
    /// Numerical solution of the `α` equation with `α(t₀) = 1`, `α̇(t₀) = 0`;
    /// `cum[k]` is `∫ dt/α²` from `t₀` to the start of step `k`.
    Sampled { ps: &'a PointSymmetric, c: f64, t0: f64, steps: Vec<Step<2>>, cum: Vec<f64> },
}

impl<'a> AlphaFunction<'a> {
    fn step(steps: &[Step<2>], t: f64) -> Result<usize> {
        steps
            .iter()
            .position(|s| s.contains(t))
            .ok_or(Error::InvalidArgument("time outside the alpha window"))
    }

    pub fn jet(&self, t: f64) -> Result<AlphaJet> {
        match self {
            AlphaFunction::Rho { ps, .. } => {
                let j = ps.jet(t)?;
                Ok(AlphaJet { alpha: j.rho, d1: j.d1, d2: j.d2 })
            }
            AlphaFunction::Sampled { ps, c, t0, steps, .. } => {
                let y = if t == *t0 { [1.0, 0.0] } else { steps[Self::step(steps, t)?].eval(t) };
                let j = ps.jet(t)?;
                Ok(AlphaJet {
                    alpha: y[0],
                    d1: y[1],
                    d2: -(c / j.rho.powi(3) - j.d2) * y[0] / j.rho,
                })
            }
        }
    }

    /// `A(t) = ∫_{t₀}^{t} dτ/α²(τ)`.
    pub fn big_a(&self, t: f64) -> Result<f64> {
        match self {
            AlphaFunction::Rho { ps, t0 } => rescale_time(ps, *t0, t),
            AlphaFunction::Sampled { t0, steps, cum, .. } => {
                if t == *t0 {
                    return Ok(0.0);
                }
                let k = Self::step(steps, t)?;
                Ok(cum[k] + inverse_square_integral(&steps[k], steps[k].t0, t)?)
            }
        }
    }
}

fn inverse_square_integral(step: &Step<2>, a: f64, b: f64) -> Result<f64> {
    quad::integrate(
        |t| {
            let alpha = step.eval(t)[0];
            Ok(1.0 / (alpha * alpha))
        },
        a,
        b,
        Tolerance::new(1e-14, 1e-12),
    )
}

/// `α` for a class over the window `[t0, t1]` (either orientation).
pub fn alpha_solve<'a>(m: &'a ErmakovModel, cls: &LinearisableClass, t0: f64, t1: f64) -> Result<AlphaFunction<'a>> {
    let ps = m.require_point_symmetric()?;
    match *cls {
        LinearisableClass::U1 { .. } => {
            ps.rho(t0)?;
            Ok(AlphaFunction::Rho { ps, t0 })
        }
        LinearisableClass::U2 { c, .. } => {
            let mut steps = Vec::new();
            let mut vanished = None;
            let cfg = Dopri5Config::with_tolerances(1e-12, 1e-14);
            ode::integrate(
                |t, y: &[f64; 2]| {
                    let j = ps.jet(t)?;
                    Ok([y[1], -(c / j.rho.powi(3) - j.d2) * y[0] / j.rho])
                },
                t0,
                [1.0, 0.0],
                t1,
                &cfg,
                |step| {
                    if step.y1[0] <= 0.0 {
                        let t = brent(|t| Ok(step.eval(t)[0]), step.t0, step.t1, 1e-14)?;
                        vanished = Some(t);
                        return Ok(Control::Stop);
                    }
                    steps.push(step.clone());
                    Ok(Control::Continue)
                },
            )?;
            if let Some(t) = vanished {
                return Err(Error::AlphaVanishes { t });
            }
            let mut cum = Vec::with_capacity(steps.len());
            let mut acc = 0.0;
            for step in &steps {
                cum.push(acc);
                acc += inverse_square_integral(step, step.t0, step.t1)?;
            }
            Ok(AlphaFunction::Sampled { ps, c, t0, steps, cum })
        }
        LinearisableClass::NotLinearisable => Err(Error::NotLinearisable),
    }
}

/// `V̄(R, t) = a/R² - b/(αR) - α̈R²/(2α)` for a class and its `α`.
pub fn linear_vbar(cls: &LinearisableClass, alpha: &AlphaFunction<'_>, r: f64, t: f64) -> Result<f64> {
    let (a, b) = cls.coefficients()?;
    let j = alpha.jet(t)?;
    Ok(a / (r * r) - b / (j.alpha * r) - j.d2 * r * r / (2.0 * j.alpha))
}

/// `φ(θ)`, `φ'(θ)` and `A(θ) = ∫ sign dθ/(φ² h)` as a piecewise interpolant.
#[derive(Debug, Clone)]
pub struct LinearTable {
    pub theta0: f64,
    pub sign: f64,
    steps: Vec<Step<3>>,
}

impl LinearTable {
    pub fn eval(&self, theta: f64) -> Result<[f64; 3]> {
        if let Some(s) = self.steps.iter().find(|s| s.contains(theta)) {
            return Ok(s.eval(theta));
        }
        let end = self.theta_end();
        if (theta - end).abs() <= 1e-12 * end.abs().max(1.0) {
            return Ok(self.steps.last().unwrap().y1);
        }
        Err(Error::InvalidArgument("theta outside the table"))
    }

    pub fn theta_end(&self) -> f64 {
        self.steps.last().map_or(self.theta0, |s| s.t1)
    }

    fn steps(&self) -> &[Step<3>] {
        &self.steps
    }
}

fn linear_rhs<'a>(m: &'a ErmakovModel, i: f64, a: f64, b: f64, sign: f64) -> impl FnMut(f64, &[f64; 3]) -> Result<[f64; 3]> + 'a {
    let k = 2.0 * (m.kappa() * i + a);
    move |theta, y| {
        let (h, dh) = h_and_derivative(theta, i, m)?;
        if !(y[0] > 0.0) {
            return Err(Error::NoTurningPoint("phi reached zero; the orbit is unbounded"));
        }
        Ok([y[1], (b - k * y[0] - h * dh * y[1]) / (h * h), sign / (y[0] * y[0] * h)])
    }
}

/// The linear equation is singular only where `h` vanishes.
fn turning_on_underflow(e: Error) -> Error {
    match e {
        Error::StepUnderflow { t, .. } => Error::AngularTurning { theta: t },
        e => e,
    }
}

fn linear_config() -> Dopri5Config {
    Dopri5Config::with_tolerances(1e-12, 1e-14)
}

/// Integrates the linear equation over `[θ₀, θ₁]` from `φ(θ₀)`, `φ'(θ₀)`.
pub fn integrate_linear(
    m: &ErmakovModel,
    i: f64,
    cls: &LinearisableClass,
    phi0: f64,
    dphi0: f64,
    theta0: f64,
    theta1: f64,
) -> Result<LinearTable> {
    let (a, b) = cls.coefficients()?;
    let sign = if theta1 >= theta0 { 1.0 } else { -1.0 };
    let mut steps = Vec::new();
    ode::integrate(linear_rhs(m, i, a, b, sign), theta0, [phi0, dphi0, 0.0], theta1, &linear_config(), |step| {
        steps.push(step.clone());
        Ok(Control::Continue)
    })
    .map_err(turning_on_underflow)?;
    Ok(LinearTable { theta0, sign, steps })
}

/// Maps a linear solution back to Cartesian states at `times`, locating each
/// `θ` by matching `A(θ)` with `∫ dt/α²`.
pub fn reconstruct(
    table: &LinearTable,
    alpha: &AlphaFunction<'_>,
    m: &ErmakovModel,
    i: f64,
    times: &[f64],
) -> Result<Trajectory> {
    let mut samples = Vec::with_capacity(times.len());
    let steps = table.steps();
    let mut cursor = 0;
    for &t in times {
        let target = alpha.big_a(t)?;
        let theta = if target == 0.0 {
            table.theta0
        } else {
            while cursor < steps.len() && steps[cursor].y1[2] < target {
                cursor += 1;
            }
            let Some(step) = steps.get(cursor) else {
                return Err(Error::InvalidArgument("time beyond the end of the linear table"));
            };
            brent(|th| Ok(step.eval(th)[2] - target), step.t0, step.t1, 1e-15)?
        };
        let y = if theta == table.theta0 && steps.first().is_some_and(|s| s.t0 == theta) {
            steps[0].y0
        } else {
            table.eval(theta)?
        };
        let (phi, dphi) = (y[0], y[1]);
        if !(phi > 0.0) {
            return Err(Error::NoTurningPoint("phi reached zero; the orbit is unbounded"));
        }
        let aj = alpha.jet(t)?;
        let r = aj.alpha / phi;
        let theta_dot = table.sign * h_of_theta(theta, i, m)? / (r * r);
        let polar = PolarState {
            r,
            theta,
            r_dot: aj.d1 / phi - aj.alpha * dphi * theta_dot / (phi * phi),
            theta_dot,
            t,
        };
        samples.push(Sample::new(m.form().from_polar(&polar)?, m)?);
    }
    Ok(Trajectory {
        samples,
        stats: IntegratorStats::default(),
    })
}

/// End-to-end solve through the linearisation, sampled at `times` (non-decreasing
/// from `init.t`). When `α` would vanish inside the span the solve restarts
/// halfway to the zero with a fresh `α`.
pub fn solve_by_linearisation(m: &ErmakovModel, init: &CartesianState, times: &[f64]) -> Result<Trajectory> {
    let cls = classify_linearisable(m)?.class;
    cls.coefficients()?;
    if times.windows(2).any(|w| w[1] < w[0]) || times.first().is_some_and(|&t| t < init.t) {
        return Err(Error::InvalidArgument("sample times must be non-decreasing from the initial time"));
    }
    let mut samples = Vec::with_capacity(times.len());
    let mut state = *init;
    let mut rest = times;
    while let Some(&t_last) = rest.last() {
        let seg_end = match alpha_solve(m, &cls, state.t, t_last) {
            Ok(_) => t_last,
            Err(Error::AlphaVanishes { t }) => state.t + 0.5 * (t - state.t),
            Err(e) => return Err(e),
        };
        let k = rest.partition_point(|&t| t <= seg_end);
        let restart = k < rest.len();
        let mut seg_times = rest[..k].to_vec();
        if restart {
            seg_times.push(seg_end);
        }
        let mut seg = solve_segment(m, &cls, &state, &seg_times)?.samples;
        if restart {
            state = seg.pop().expect("segment ends at the restart time").state;
        }
        samples.extend(seg);
        rest = &rest[k..];
    }
    Ok(Trajectory {
        samples,
        stats: IntegratorStats::default(),
    })
}

fn solve_segment(m: &ErmakovModel, cls: &LinearisableClass, init: &CartesianState, times: &[f64]) -> Result<Trajectory> {
    let cls = *cls;
    let (a, b) = cls.coefficients()?;
    let t_end = times.last().copied().unwrap_or(init.t);
    let alpha = alpha_solve(m, &cls, init.t, t_end.max(init.t))?;
    let i = ermakov_i_cart(init, m)?;
    let l = init.angular_momentum();
    if l == 0.0 {
        return Err(Error::AngularTurning { theta: init.y.atan2(init.x) });
    }
    let sign = l.signum();
    let theta0 = init.y.atan2(init.x);
    let (r0, r_dot0) = radial(init, m)?;
    let aj = alpha.jet(init.t)?;
    let h0 = h_of_theta(theta0, i, m)?;
    let phi0 = aj.alpha / r0;
    let dphi0 = (aj.d1 * r0 - aj.alpha * r_dot0) / (sign * h0);
    let target = alpha.big_a(t_end)?;

    let mut steps = Vec::new();
    if target > 0.0 {
        ode::integrate(
            linear_rhs(m, i, a, b, sign),
            theta0,
            [phi0, dphi0, 0.0],
            theta0 + sign * 1e6,
            &linear_config(),
            |step| {
                let done = step.y1[2] >= target;
                steps.push(step.clone());
                Ok(if done { Control::Stop } else { Control::Continue })
            },
        )
        .map_err(turning_on_underflow)?;
    }
    let table = LinearTable { theta0, sign, steps };
    if table.steps.is_empty() {
        let s = Sample::new(*init, m)?;
        return Ok(Trajectory {
            samples: times.iter().map(|_| s).collect(),
            stats: IntegratorStats::default(),
        });
    }
    reconstruct(&table, &alpha, m, i, times)
}

/// Residual of the linear equation evaluated on a state of the original
/// system, scaled by `1 + |φ|`.
pub fn quasi_linear_residual(
    s: &CartesianState,
    m: &ErmakovModel,
    cls: &LinearisableClass,
    alpha: &AlphaFunction<'_>,
) -> Result<f64> {
    let (a, b) = cls.coefficients()?;
    let i = ermakov_i_cart(s, m)?;
    let acc = eom_rhs(s, m)?;
    let form = m.form();
    let (q, v) = (s.position(), s.velocity());
    let (r, r_dot) = radial(s, m)?;
    let r_ddot = (form.inner(v, v) + form.inner(q, acc)) / r - r_dot * r_dot / r;
    let e2 = s.x * s.x + s.y * s.y;
    let l = s.angular_momentum();
    let l_dot = s.x * acc[1] - s.y * acc[0];
    let th_dot = l / e2;
    let th_ddot = l_dot / e2 - 2.0 * l * (s.x * s.x_dot + s.y * s.y_dot) / (e2 * e2);
    let aj = alpha.jet(s.t)?;
    let phi = aj.alpha / r;
    let phi_dot = aj.d1 / r - aj.alpha * r_dot / (r * r);
    let phi_ddot = aj.d2 / r - 2.0 * aj.d1 * r_dot / (r * r)
        + aj.alpha * (2.0 * r_dot * r_dot / (r * r * r) - r_ddot / (r * r));
    let dphi = phi_dot / th_dot;
    let d2phi = (phi_ddot * th_dot - phi_dot * th_ddot) / th_dot.powi(3);
    let theta = s.y.atan2(s.x);
    let (h, dh) = h_and_derivative(theta, i, m)?;
    let residual = h * h * d2phi + h * dh * dphi + 2.0 * (m.kappa() * i + a) * phi - b;
    Ok(residual / (1.0 + phi.abs()))
}
