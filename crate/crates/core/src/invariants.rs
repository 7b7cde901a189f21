//! The Ermakov invariant `I`, the Noether invariant `J` and the Hamiltonian.

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::geometry::{CartesianState, PolarState};
use crate::model::{ErmakovModel, AXIS_EPS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum InvariantKind {
    ErmakovI,
    NoetherJ,
    HamiltonianH,
}

impl InvariantKind {
    pub fn symbol(self) -> &'static str {
        match self {
            InvariantKind::ErmakovI => "I",
            InvariantKind::NoetherJ => "J",
            InvariantKind::HamiltonianH => "H",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantValue {
    pub value: f64,
    pub which: InvariantKind,
    pub evaluated_at: CartesianState,
}

fn finite(v: f64, s: &CartesianState) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::AxisSingularity { x: s.x, y: s.y })
    }
}

/// `I = ½(xẏ - yẋ)² + F(y/x) + G(x/y)`.
pub fn ermakov_i_cart(s: &CartesianState, m: &ErmakovModel) -> Result<f64> {
    let l = s.angular_momentum();
    finite(0.5 * l * l + m.coupling(s.x, s.y)?, s)
}

/// `I = ½R⁴ψ⁴θ̇² + F(tan θ) + G(cot θ)`.
pub fn ermakov_i_polar(p: &PolarState, m: &ErmakovModel) -> Result<f64> {
    let psi_sq = m.form().psi_sq(p.theta)?;
    let (s, c) = p.theta.sin_cos();
    let mut value = 0.5 * (p.r * p.r * psi_sq * p.theta_dot).powi(2);
    if !m.f_is_zero() {
        if c.abs() < AXIS_EPS {
            return Err(Error::AxisSingularity { x: c, y: s });
        }
        value += m.big_f().eval(s / c)?;
    }
    if !m.g_is_zero() {
        if s.abs() < AXIS_EPS {
            return Err(Error::AxisSingularity { x: c, y: s });
        }
        value += m.big_g().eval(c / s)?;
    }
    Ok(value)
}

/// `R` and `Ṙ` of a Cartesian state.
pub fn radial(s: &CartesianState, m: &ErmakovModel) -> Result<(f64, f64)> {
    let form = m.form();
    let r2 = form.r_sq(s.x, s.y);
    if !(r2 > 0.0) {
        return Err(Error::DegenerateDirection { theta: s.y.atan2(s.x) });
    }
    let r = r2.sqrt();
    Ok((r, form.inner(s.position(), s.velocity()) / r))
}

/// `J = ½(ρṘ - ρ̇R)² + U(R/ρ) + κI(ρ/R)²`.
pub fn noether_j(s: &CartesianState, m: &ErmakovModel) -> Result<f64> {
    let ps = m.require_point_symmetric()?;
    let jet = ps.jet(s.t)?;
    let (r, r_dot) = radial(s, m)?;
    let i = ermakov_i_cart(s, m)?;
    let w = jet.rho * r_dot - jet.d1 * r;
    let q = jet.rho / r;
    finite(0.5 * w * w + ps.u().value(r / jet.rho)? + m.kappa() * i * q * q, s)
}

/// Velocity form `H = ½Ṙ² + κI/R² + V̄(R, t)`.
pub fn hamiltonian(s: &CartesianState, m: &ErmakovModel) -> Result<f64> {
    let (r, r_dot) = radial(s, m)?;
    let i = ermakov_i_cart(s, m)?;
    finite(0.5 * r_dot * r_dot + m.kappa() * i / (r * r) + m.vbar(r, s.t)?, s)
}

/// Canonical momenta `p = M q̇`.
pub fn momenta(s: &CartesianState, m: &ErmakovModel) -> [f64; 2] {
    m.form().apply(s.velocity())
}

/// Phase-space form `H = (C pₓ² - 2B pₓ p_y + A p_y²)/2κ + V`.
pub fn hamiltonian_phase_space(x: f64, y: f64, px: f64, py: f64, t: f64, m: &ErmakovModel) -> Result<f64> {
    let form = m.form();
    let kinetic = (form.c() * px * px - 2.0 * form.b() * px * py + form.a() * py * py) / (2.0 * m.kappa());
    Ok(kinetic + m.potential_energy(x, y, t)?)
}

pub fn evaluate(which: InvariantKind, s: &CartesianState, m: &ErmakovModel) -> Result<InvariantValue> {
    let value = match which {
        InvariantKind::ErmakovI => ermakov_i_cart(s, m)?,
        InvariantKind::NoetherJ => noether_j(s, m)?,
        InvariantKind::HamiltonianH => hamiltonian(s, m)?,
    };
    Ok(InvariantValue {
        value,
        which,
        evaluated_at: *s,
    })
}
