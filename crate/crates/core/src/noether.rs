//! Noether symmetries, the converse construction from the Ermakov invariant,
//! and Poisson brackets of the invariants.
//!
//! A generator is evaluated as "jets": each component together with its total
//! time derivative along the flow, with accelerations taken from the equations
//! of motion.

#[allow(unused_imports)]
use num_traits::Float;

use crate::dynamics::eom_rhs;
use crate::error::Result;
use crate::geometry::{CartesianState, PolarState};
use crate::invariants::{ermakov_i_cart, radial};
use crate::model::ErmakovModel;

/// A quantity and its total time derivative.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet {
    pub value: f64,
    pub dot: f64,
}

impl Jet {
    pub const fn new(value: f64, dot: f64) -> Self {
        Self { value, dot }
    }

    pub const fn constant(value: f64) -> Self {
        Self { value, dot: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorKind {
    /// Components depend on `(t, x, y)` only.
    Point,
    /// Components also depend on velocities.
    Dynamical,
}

/// State plus the acceleration the model assigns to it.
#[derive(Debug, Clone, Copy)]
pub struct FlowPoint<'a> {
    pub s: CartesianState,
    pub acc: [f64; 2],
    pub m: &'a ErmakovModel,
}

impl<'a> FlowPoint<'a> {
    pub fn new(s: &CartesianState, m: &'a ErmakovModel) -> Result<Self> {
        Ok(Self {
            s: *s,
            acc: eom_rhs(s, m)?,
            m,
        })
    }

    /// `L = x ẏ - y ẋ` and its derivative.
    pub fn angular_momentum(&self) -> Jet {
        let s = &self.s;
        Jet::new(s.angular_momentum(), s.x * self.acc[1] - s.y * self.acc[0])
    }

    /// `R²` and its derivative.
    pub fn r_sq(&self) -> Jet {
        let form = self.m.form();
        let q = self.s.position();
        Jet::new(form.inner(q, q), 2.0 * form.inner(q, self.s.velocity()))
    }

    /// Lagrangian `½ q̇ᵀMq̇ - V` and its total derivative.
    pub fn lagrangian(&self) -> Result<Jet> {
        let (s, m) = (&self.s, self.m);
        let form = m.form();
        let v = s.velocity();
        let grad = m.potential_gradient(s.x, s.y, s.t)?;
        let value = 0.5 * form.inner(v, v) - m.potential_energy(s.x, s.y, s.t)?;
        let dot = form.inner(v, self.acc) - grad[0] * v[0] - grad[1] * v[1] - m.potential_dt(s.x, s.y, s.t)?;
        Ok(Jet::new(value, dot))
    }
}

/// `τ`, `η` and the gauge `Λ`, each with its total time derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorValue {
    pub tau: Jet,
    pub eta: [Jet; 2],
    pub gauge: Jet,
}

pub trait SymmetryGenerator {
    fn kind(&self) -> GeneratorKind;

    fn evaluate(&self, p: &FlowPoint<'_>) -> Result<GeneratorValue>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gauge {
    /// `Λ = ½(ρρ̈ + ρ̇²) R²`.
    Standard,
    /// `Λ = 0`.
    Zero,
    /// `Λ = ½(ρρ̈ + ρ̇²) R² + δ R²`, a deliberately wrong gauge.
    Corrupted(f64),
}

/// `τ = ρ²`, `η = ρρ̇ (x, y)` on the point-symmetric family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointSymmetry {
    pub gauge: Gauge,
}

impl Default for PointSymmetry {
    fn default() -> Self {
        Self { gauge: Gauge::Standard }
    }
}

impl SymmetryGenerator for PointSymmetry {
    fn kind(&self) -> GeneratorKind {
        GeneratorKind::Point
    }

    fn evaluate(&self, p: &FlowPoint<'_>) -> Result<GeneratorValue> {
        let j = p.m.require_point_symmetric()?.jet(p.s.t)?;
        let s = &p.s;
        let c = j.rho * j.d1;
        let c_dot = j.d1 * j.d1 + j.rho * j.d2;
        let eta = [
            Jet::new(c * s.x, c_dot * s.x + c * s.x_dot),
            Jet::new(c * s.y, c_dot * s.y + c * s.y_dot),
        ];
        let r2 = p.r_sq();
        let k = 0.5 * (j.rho * j.d2 + j.d1 * j.d1);
        let k_dot = 0.5 * (j.rho * j.d3 + 3.0 * j.d1 * j.d2);
        let standard = Jet::new(k * r2.value, k_dot * r2.value + k * r2.dot);
        let gauge = match self.gauge {
            Gauge::Standard => standard,
            Gauge::Zero => Jet::default(),
            Gauge::Corrupted(delta) => Jet::new(standard.value + delta * r2.value, standard.dot + delta * r2.dot),
        };
        Ok(GeneratorValue {
            tau: Jet::new(j.rho * j.rho, 2.0 * c),
            eta,
            gauge,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TauChoice {
    Zero,
    One,
    /// `τ = R² θ̇`.
    AngularRate,
}

impl TauChoice {
    pub const ALL: [TauChoice; 3] = [TauChoice::Zero, TauChoice::One, TauChoice::AngularRate];

    pub fn jet(self, p: &FlowPoint<'_>) -> Jet {
        match self {
            TauChoice::Zero => Jet::constant(0.0),
            TauChoice::One => Jet::constant(1.0),
            TauChoice::AngularRate => {
                let s = &p.s;
                let r2 = p.r_sq();
                let l = p.angular_momentum();
                let e2 = s.x * s.x + s.y * s.y;
                let e2_dot = 2.0 * (s.x * s.x_dot + s.y * s.y_dot);
                let value = r2.value * l.value / e2;
                let dot = (r2.dot * l.value + r2.value * l.dot) / e2 - value * e2_dot / e2;
                Jet::new(value, dot)
            }
        }
    }

    /// Evaluated from polar data, `θ̇` being the Euclidean angular rate.
    pub fn polar_value(self, p: &PolarState) -> f64 {
        match self {
            TauChoice::Zero => 0.0,
            TauChoice::One => 1.0,
            TauChoice::AngularRate => p.r * p.r * p.theta_dot,
        }
    }
}

/// Generator built from the Ermakov invariant by inverting the kinetic
/// Hessian: `η = -M⁻¹ ∂I/∂q̇ + τ q̇ = L M⁻¹(y, -x) + τ q̇`.
///
/// Its gauge is `Λ = I - q̇·∂I/∂q̇ + τ L_lag = I - L² + τ L_lag`, which makes
/// the conserved Noether charge equal to `-I`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConverseGenerator {
    pub tau: TauChoice,
}

impl ConverseGenerator {
    pub fn new(tau: TauChoice) -> Self {
        Self { tau }
    }
}

impl SymmetryGenerator for ConverseGenerator {
    fn kind(&self) -> GeneratorKind {
        GeneratorKind::Dynamical
    }

    fn evaluate(&self, p: &FlowPoint<'_>) -> Result<GeneratorValue> {
        let (s, m) = (&p.s, p.m);
        let form = m.form();
        let l = p.angular_momentum();
        let tau = self.tau.jet(p);
        let base = form.apply_inverse([s.y, -s.x]);
        let base_dot = form.apply_inverse([s.y_dot, -s.x_dot]);
        let v = s.velocity();
        let eta: [Jet; 2] = core::array::from_fn(|i| {
            Jet::new(
                l.value * base[i] + tau.value * v[i],
                l.dot * base[i] + l.value * base_dot[i] + tau.dot * v[i] + tau.value * p.acc[i],
            )
        });
        let i_value = ermakov_i_cart(s, m)?;
        let grad = phase_gradient_velocity(PhaseFunction::I, s, m)?;
        let i_dot = grad.dq[0] * v[0] + grad.dq[1] * v[1] + grad.dv[0] * p.acc[0] + grad.dv[1] * p.acc[1];
        let lag = p.lagrangian()?;
        let gauge = Jet::new(
            i_value - l.value * l.value + tau.value * lag.value,
            i_dot - 2.0 * l.value * l.dot + tau.dot * lag.value + tau.value * lag.dot,
        );
        Ok(GeneratorValue { tau, eta, gauge })
    }
}

/// `τ ∂L/∂t + η·∂L/∂q + (η̇ - τ̇ q̇)·∂L/∂q̇ + τ̇ L - Λ̇`.
pub fn noether_residual<G: SymmetryGenerator + ?Sized>(gen: &G, s: &CartesianState, m: &ErmakovModel) -> Result<f64> {
    let p = FlowPoint::new(s, m)?;
    let g = gen.evaluate(&p)?;
    let grad = m.potential_gradient(s.x, s.y, s.t)?;
    let l_t = -m.potential_dt(s.x, s.y, s.t)?;
    let momentum = m.form().apply(s.velocity());
    let v = s.velocity();
    let lag = p.lagrangian()?.value;
    let mut r = g.tau.value * l_t + g.tau.dot * lag - g.gauge.dot;
    for i in 0..2 {
        r += -g.eta[i].value * grad[i] + (g.eta[i].dot - g.tau.dot * v[i]) * momentum[i];
    }
    Ok(r)
}

/// Conserved charge `τ L + (η - τ q̇)·p - Λ` of a generator.
pub fn noether_charge<G: SymmetryGenerator + ?Sized>(gen: &G, s: &CartesianState, m: &ErmakovModel) -> Result<f64> {
    let p = FlowPoint::new(s, m)?;
    let g = gen.evaluate(&p)?;
    let momentum = m.form().apply(s.velocity());
    let v = s.velocity();
    let mut c = g.tau.value * p.lagrangian()?.value - g.gauge.value;
    for i in 0..2 {
        c += (g.eta[i].value - g.tau.value * v[i]) * momentum[i];
    }
    Ok(c)
}

/// Pushes a Cartesian variation `(τ, η)` through the polar chart:
/// `δR = (Mq)·η / R`, `δθ = (x η₂ - y η₁)/(x² + y²)`.
pub fn polar_variation(eta: [f64; 2], s: &CartesianState, m: &ErmakovModel) -> Result<(f64, f64)> {
    let (r, _) = radial(s, m)?;
    let mq = m.form().apply(s.position());
    let e2 = s.x * s.x + s.y * s.y;
    Ok(((mq[0] * eta[0] + mq[1] * eta[1]) / r, (s.x * eta[1] - s.y * eta[0]) / e2))
}

/// The polar form of the converse generator: `δR = τṘ`, `δθ = -R²θ̇/κ + τθ̇`.
pub fn converse_polar(tau: f64, p: &PolarState, kappa: f64) -> (f64, f64) {
    (tau * p.r_dot, -p.r * p.r * p.theta_dot / kappa + tau * p.theta_dot)
}

/// Catalogue of phase-space functions with analytic gradients.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseFunction {
    I,
    J,
    H,
    X,
    Y,
    Px,
    Py,
}

impl PhaseFunction {
    pub const ALL: [PhaseFunction; 7] = [
        PhaseFunction::I,
        PhaseFunction::J,
        PhaseFunction::H,
        PhaseFunction::X,
        PhaseFunction::Y,
        PhaseFunction::Px,
        PhaseFunction::Py,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PhaseFunction::I => "I",
            PhaseFunction::J => "J",
            PhaseFunction::H => "H",
            PhaseFunction::X => "x",
            PhaseFunction::Y => "y",
            PhaseFunction::Px => "px",
            PhaseFunction::Py => "py",
        }
    }
}

/// Canonical coordinates `(x, y, pₓ, p_y)` at time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub x: f64,
    pub y: f64,
    pub px: f64,
    pub py: f64,
    pub t: f64,
}

impl PhasePoint {
    pub fn from_state(s: &CartesianState, m: &ErmakovModel) -> Self {
        let p = m.form().apply(s.velocity());
        Self {
            x: s.x,
            y: s.y,
            px: p[0],
            py: p[1],
            t: s.t,
        }
    }

    /// `ẋ = (C pₓ - B p_y)/κ`, `ẏ = (A p_y - B pₓ)/κ`.
    pub fn to_state(&self, m: &ErmakovModel) -> CartesianState {
        let v = m.form().apply_inverse([self.px, self.py]);
        CartesianState::new(self.x, self.y, v[0], v[1], self.t)
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.x, self.y, self.px, self.py]
    }

    pub fn from_array(a: [f64; 4], t: f64) -> Self {
        Self {
            x: a[0],
            y: a[1],
            px: a[2],
            py: a[3],
            t,
        }
    }
}

/// Gradient of a velocity-form function: `∂/∂q` at fixed `q̇` and `∂/∂q̇`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityGradient {
    pub dq: [f64; 2],
    pub dv: [f64; 2],
}

pub fn phase_value(f: PhaseFunction, p: &PhasePoint, m: &ErmakovModel) -> Result<f64> {
    let s = p.to_state(m);
    Ok(match f {
        PhaseFunction::I => ermakov_i_cart(&s, m)?,
        PhaseFunction::J => crate::invariants::noether_j(&s, m)?,
        PhaseFunction::H => crate::invariants::hamiltonian_phase_space(p.x, p.y, p.px, p.py, p.t, m)?,
        PhaseFunction::X => p.x,
        PhaseFunction::Y => p.y,
        PhaseFunction::Px => p.px,
        PhaseFunction::Py => p.py,
    })
}

/// Analytic gradient in `(q, q̇)`.
pub fn phase_gradient_velocity(f: PhaseFunction, s: &CartesianState, m: &ErmakovModel) -> Result<VelocityGradient> {
    let form = m.form();
    Ok(match f {
        PhaseFunction::I => {
            let l = s.angular_momentum();
            let dphi = m.coupling_gradient(s.x, s.y)?;
            VelocityGradient {
                dq: [l * s.y_dot + dphi[0], -l * s.x_dot + dphi[1]],
                dv: [-l * s.y, l * s.x],
            }
        }
        PhaseFunction::J => {
            let ps = m.require_point_symmetric()?;
            let j = ps.jet(s.t)?;
            let (r, r_dot) = radial(s, m)?;
            let i = ermakov_i_cart(s, m)?;
            let gi = phase_gradient_velocity(PhaseFunction::I, s, m)?;
            let mq = form.apply(s.position());
            let mv = form.apply(s.velocity());
            let w = j.rho * r_dot - j.d1 * r;
            let du = ps.u().derivative(r / j.rho)? / j.rho;
            let k = m.kappa() * j.rho * j.rho;
            let r2 = r * r;
            let dq = core::array::from_fn(|a| {
                let dr = mq[a] / r;
                let dr_dot = mv[a] / r - r_dot * mq[a] / r2;
                w * (j.rho * dr_dot - j.d1 * dr) + du * dr + k * (gi.dq[a] / r2 - 2.0 * i * dr / (r2 * r))
            });
            let dv = core::array::from_fn(|a| w * j.rho * mq[a] / r + k * gi.dv[a] / r2);
            VelocityGradient { dq, dv }
        }
        PhaseFunction::H => VelocityGradient {
            dq: m.potential_gradient(s.x, s.y, s.t)?,
            dv: form.apply(s.velocity()),
        },
        PhaseFunction::X => VelocityGradient { dq: [1.0, 0.0], dv: [0.0; 2] },
        PhaseFunction::Y => VelocityGradient { dq: [0.0, 1.0], dv: [0.0; 2] },
        PhaseFunction::Px => VelocityGradient {
            dq: [0.0; 2],
            dv: [form.a(), form.b()],
        },
        PhaseFunction::Py => VelocityGradient {
            dq: [0.0; 2],
            dv: [form.b(), form.c()],
        },
    })
}

/// Canonical gradient `(∂/∂x, ∂/∂y, ∂/∂pₓ, ∂/∂p_y)`, using `∂/∂p = M⁻¹ ∂/∂q̇`.
pub fn phase_gradient(f: PhaseFunction, p: &PhasePoint, m: &ErmakovModel) -> Result<[f64; 4]> {
    let g = phase_gradient_velocity(f, &p.to_state(m), m)?;
    let dp = m.form().apply_inverse(g.dv);
    Ok([g.dq[0], g.dq[1], dp[0], dp[1]])
}

/// `{Fa, Fb} = Σ ∂Fa/∂qⁱ ∂Fb/∂pᵢ - ∂Fa/∂pᵢ ∂Fb/∂qⁱ`.
pub fn poisson_bracket(fa: PhaseFunction, fb: PhaseFunction, p: &PhasePoint, m: &ErmakovModel) -> Result<f64> {
    let ga = phase_gradient(fa, p, m)?;
    let gb = phase_gradient(fb, p, m)?;
    Ok(ga[0] * gb[2] + ga[1] * gb[3] - ga[2] * gb[0] - ga[3] * gb[1])
}
