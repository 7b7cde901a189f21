//! Validated Ermakov models.
//!
//! A model couples a [`QuadraticForm`] with `f(λ)`, `g(λ)` and a potential
//! `V = V̄(R, t) + κ/R² (F(y/x) + G(x/y))`, where `F`, `G` are antiderivatives
//! of `f`, `g` from fixed reference limits. `V̄` is either an arbitrary
//! expression in `(R, t)` or the point-symmetric family
//! `V̄ = -ρ̈/(2ρ) R² + U(R/ρ)/ρ²`.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::expr::{Antiderivative, Expr};
use crate::geometry::{QuadraticForm, KAPPA_EPS};

/// Below this `|sin θ|` or `|cos θ|` the angular formulas switch to their
/// on-axis limits or report an axis singularity.
pub const AXIS_EPS: f64 = 1e-12;

pub const LAMBDA: &str = "lambda";

/// Parametric or free-form `U(s)`.
#[derive(Debug, Clone, PartialEq)]
pub enum USpec {
    /// Expression in `s`.
    Expr(String),
    /// `U = a/s² - b/s`.
    InverseSquareCoulomb { a: f64, b: f64 },
    /// `U = a/s² + c s²/2`.
    InverseSquareHarmonic { a: f64, c: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    /// `V̄(R, t)` as an expression.
    Generic { vbar: String },
    PointSymmetric { rho: String, u: USpec },
}

/// Unvalidated model description, e.g. as read from a scenario file.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub f: String,
    pub g: String,
    pub f_lower: f64,
    pub g_lower: f64,
    pub potential: PotentialSpec,
}

impl ModelSpec {
    /// Identity-form spec with the default reference limits `λ₀ = 1`.
    pub fn new(form: (f64, f64, f64), f: &str, g: &str, potential: PotentialSpec) -> Self {
        Self {
            a: form.0,
            b: form.1,
            c: form.2,
            f: f.to_string(),
            g: g.to_string(),
            f_lower: 1.0,
            g_lower: 1.0,
            potential,
        }
    }

    pub fn point_symmetric(form: (f64, f64, f64), f: &str, g: &str, rho: &str, u: USpec) -> Self {
        Self::new(
            form,
            f,
            g,
            PotentialSpec::PointSymmetric {
                rho: rho.to_string(),
                u,
            },
        )
    }
}

#[derive(Debug, Clone)]
pub enum UFunction {
    Expr { u: Expr, du: Expr, d2u: Expr },
    InverseSquareCoulomb { a: f64, b: f64 },
    InverseSquareHarmonic { a: f64, c: f64 },
}

impl UFunction {
    pub fn value(&self, s: f64) -> Result<f64> {
        Ok(match self {
            UFunction::Expr { u, .. } => u.eval(&[s])?,
            UFunction::InverseSquareCoulomb { a, b } => a / (s * s) - b / s,
            UFunction::InverseSquareHarmonic { a, c } => a / (s * s) + 0.5 * c * s * s,
        })
    }

    pub fn derivative(&self, s: f64) -> Result<f64> {
        Ok(match self {
            UFunction::Expr { du, .. } => du.eval(&[s])?,
            UFunction::InverseSquareCoulomb { a, b } => -2.0 * a / (s * s * s) + b / (s * s),
            UFunction::InverseSquareHarmonic { a, c } => -2.0 * a / (s * s * s) + c * s,
        })
    }

    pub fn second_derivative(&self, s: f64) -> Result<f64> {
        Ok(match self {
            UFunction::Expr { d2u, .. } => d2u.eval(&[s])?,
            UFunction::InverseSquareCoulomb { a, b } => 6.0 * a / s.powi(4) - 2.0 * b / (s * s * s),
            UFunction::InverseSquareHarmonic { a, c } => 6.0 * a / s.powi(4) + c,
        })
    }
}

/// `ρ` and its first three time derivatives at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoJet {
    pub rho: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

#[derive(Debug, Clone)]
pub struct PointSymmetric {
    rho: [Expr; 4],
    u: UFunction,
    spec: USpec,
}

impl PointSymmetric {
    pub fn rho_expr(&self) -> &Expr {
        &self.rho[0]
    }

    pub fn u(&self) -> &UFunction {
        &self.u
    }

    pub fn u_spec(&self) -> &USpec {
        &self.spec
    }

    /// True when `ρ` constant-folds (so every derivative vanishes).
    pub fn rho_is_constant(&self) -> bool {
        self.rho[0].constant_value().is_some()
    }

    pub fn rho(&self, t: f64) -> Result<f64> {
        let rho = self.rho[0].eval(&[t])?;
        if rho <= 0.0 {
            return Err(Error::NonPositiveRho { t, rho });
        }
        Ok(rho)
    }

    pub fn jet(&self, t: f64) -> Result<RhoJet> {
        let rho = self.rho(t)?;
        Ok(RhoJet {
            rho,
            d1: self.rho[1].eval(&[t])?,
            d2: self.rho[2].eval(&[t])?,
            d3: self.rho[3].eval(&[t])?,
        })
    }

    fn vbar(&self, r: f64, t: f64) -> Result<f64> {
        let j = self.jet(t)?;
        let s = r / j.rho;
        Ok(-0.5 * j.d2 / j.rho * r * r + self.u.value(s)? / (j.rho * j.rho))
    }

    fn vbar_r(&self, r: f64, t: f64) -> Result<f64> {
        let j = self.jet(t)?;
        let s = r / j.rho;
        Ok(-j.d2 / j.rho * r + self.u.derivative(s)? / j.rho.powi(3))
    }

    fn vbar_t(&self, r: f64, t: f64) -> Result<f64> {
        let j = self.jet(t)?;
        let s = r / j.rho;
        let rho2 = j.rho * j.rho;
        let quad = -0.5 * (j.d3 * j.rho - j.d2 * j.d1) / rho2 * r * r;
        let u_part = self.u.derivative(s)? * (-r * j.d1 / rho2) / rho2
            - 2.0 * j.d1 * self.u.value(s)? / (rho2 * j.rho);
        Ok(quad + u_part)
    }
}

#[derive(Debug, Clone)]
pub struct GenericPotential {
    vbar: Expr,
    vbar_r: Expr,
    vbar_t: Expr,
}

impl GenericPotential {
    pub fn vbar_expr(&self) -> &Expr {
        &self.vbar
    }
}

#[derive(Debug, Clone)]
pub enum Potential {
    Generic(GenericPotential),
    PointSymmetric(PointSymmetric),
}

/// A validated, immutable Ermakov model.
#[derive(Debug, Clone)]
pub struct ErmakovModel {
    form: QuadraticForm,
    big_f: Antiderivative,
    big_g: Antiderivative,
    f_prime: Expr,
    g_prime: Expr,
    f_at_zero: Option<f64>,
    g_at_zero: Option<f64>,
    potential: Potential,
}

fn parse_into(
    issues: &mut Vec<String>,
    label: &str,
    text: &str,
    vars: &[&str],
) -> Option<Expr> {
    match Expr::parse(text, vars) {
        Ok(e) => Some(e),
        Err(err) => {
            issues.push(format!("{label}: {err}"));
            None
        }
    }
}

impl ErmakovModel {
    /// Checks every part of `spec` and reports all problems at once.
    pub fn validate(spec: &ModelSpec) -> Result<Self> {
        let mut issues = Vec::new();
        for (name, v) in [("A", spec.a), ("B", spec.b), ("C", spec.c)] {
            if !v.is_finite() {
                issues.push(format!("form coefficient {name} must be finite"));
            }
        }
        let form = QuadraticForm::unchecked(spec.a, spec.b, spec.c);
        let kappa = form.kappa();
        if kappa.is_finite() && kappa.abs() < KAPPA_EPS {
            issues.push(format!("kappa = AC - B^2 = {kappa} must be nonzero"));
        }
        if !spec.f_lower.is_finite() {
            issues.push("f lower limit must be finite".to_string());
        }
        if !spec.g_lower.is_finite() {
            issues.push("g lower limit must be finite".to_string());
        }
        let f = parse_into(&mut issues, "f", &spec.f, &[LAMBDA]);
        let g = parse_into(&mut issues, "g", &spec.g, &[LAMBDA]);
        let potential = match &spec.potential {
            PotentialSpec::Generic { vbar } => {
                parse_into(&mut issues, "vbar", vbar, &["R", "t"]).map(|vbar| {
                    Potential::Generic(GenericPotential {
                        vbar_r: vbar.diff("R"),
                        vbar_t: vbar.diff("t"),
                        vbar,
                    })
                })
            }
            PotentialSpec::PointSymmetric { rho, u } => {
                let rho = parse_into(&mut issues, "rho", rho, &["t"]);
                let u_fn = match u {
                    USpec::Expr(text) => parse_into(&mut issues, "U", text, &["s"]).map(|u| {
                        let du = u.diff("s");
                        let d2u = du.diff("s");
                        UFunction::Expr { u, du, d2u }
                    }),
                    USpec::InverseSquareCoulomb { a, b } => {
                        if a.is_finite() && b.is_finite() {
                            Some(UFunction::InverseSquareCoulomb { a: *a, b: *b })
                        } else {
                            issues.push("U parameters must be finite".to_string());
                            None
                        }
                    }
                    USpec::InverseSquareHarmonic { a, c } => {
                        if a.is_finite() && c.is_finite() {
                            Some(UFunction::InverseSquareHarmonic { a: *a, c: *c })
                        } else {
                            issues.push("U parameters must be finite".to_string());
                            None
                        }
                    }
                };
                match (rho, u_fn) {
                    (Some(rho), Some(u_fn)) => {
                        let d1 = rho.diff("t");
                        let d2 = d1.diff("t");
                        let d3 = d2.diff("t");
                        Some(Potential::PointSymmetric(PointSymmetric {
                            rho: [rho, d1, d2, d3],
                            u: u_fn,
                            spec: u.clone(),
                        }))
                    }
                    _ => None,
                }
            }
        };
        if !issues.is_empty() {
            return Err(Error::Validation(issues));
        }
        let (f, g, potential) = (f.unwrap(), g.unwrap(), potential.unwrap());
        Ok(Self {
            form,
            f_at_zero: f.eval(&[0.0]).ok(),
            g_at_zero: g.eval(&[0.0]).ok(),
            f_prime: f.diff(LAMBDA),
            g_prime: g.diff(LAMBDA),
            big_f: Antiderivative::new(f, spec.f_lower),
            big_g: Antiderivative::new(g, spec.g_lower),
            potential,
        })
    }

    pub fn form(&self) -> &QuadraticForm {
        &self.form
    }

    pub fn kappa(&self) -> f64 {
        self.form.kappa()
    }

    /// `F(u) = ∫_{λ₀f}^{u} f`.
    pub fn big_f(&self) -> &Antiderivative {
        &self.big_f
    }

    /// `G(u) = ∫_{λ₀g}^{u} g`.
    pub fn big_g(&self) -> &Antiderivative {
        &self.big_g
    }

    pub fn f_is_zero(&self) -> bool {
        self.big_f.is_zero()
    }

    pub fn g_is_zero(&self) -> bool {
        self.big_g.is_zero()
    }

    /// Both coupling functions vanish identically.
    pub fn is_decoupled(&self) -> bool {
        self.f_is_zero() && self.g_is_zero()
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn point_symmetric(&self) -> Option<&PointSymmetric> {
        match &self.potential {
            Potential::PointSymmetric(ps) => Some(ps),
            Potential::Generic(_) => None,
        }
    }

    pub fn require_point_symmetric(&self) -> Result<&PointSymmetric> {
        self.point_symmetric().ok_or(Error::NotPointSymmetric)
    }

    /// Whether the line `x = 0` is singular for the equations of motion.
    pub fn x_zero_is_singular(&self) -> bool {
        !self.f_is_zero() || (!self.g_is_zero() && self.g_at_zero != Some(0.0))
    }

    /// Whether the line `y = 0` is singular for the equations of motion.
    pub fn y_zero_is_singular(&self) -> bool {
        !self.g_is_zero() || (!self.f_is_zero() && self.f_at_zero != Some(0.0))
    }

    /// `Φ = F(y/x) + G(x/y)`; each term only needs its own ratio to exist.
    pub fn coupling(&self, x: f64, y: f64) -> Result<f64> {
        let mut phi = 0.0;
        if !self.f_is_zero() {
            if x == 0.0 {
                return Err(Error::AxisSingularity { x, y });
            }
            phi += self.big_f.eval(y / x)?;
        }
        if !self.g_is_zero() {
            if y == 0.0 {
                return Err(Error::AxisSingularity { x, y });
            }
            phi += self.big_g.eval(x / y)?;
        }
        Ok(phi)
    }

    /// `∇Φ = (-f(y/x) y/x² + g(x/y)/y, f(y/x)/x - g(x/y) x/y²)`.
    pub fn coupling_gradient(&self, x: f64, y: f64) -> Result<[f64; 2]> {
        let mut grad = [0.0; 2];
        if !self.f_is_zero() {
            if x == 0.0 {
                return Err(Error::AxisSingularity { x, y });
            }
            let fv = self.big_f.derivative(y / x)?;
            grad[0] -= fv * y / (x * x);
            grad[1] += fv / x;
        }
        if !self.g_is_zero() {
            if y == 0.0 {
                return Err(Error::AxisSingularity { x, y });
            }
            let gv = self.big_g.derivative(x / y)?;
            grad[0] += gv / y;
            grad[1] -= gv * x / (y * y);
        }
        Ok(grad)
    }

    /// The non-central terms `(f(y/x)/(y x²), g(x/y)/(x y²))` of the
    /// equations of motion, using the on-axis limit `f'(0)/x³` when `f(0) = 0`.
    pub fn coupling_forces(&self, x: f64, y: f64) -> Result<[f64; 2]> {
        let mut out = [0.0; 2];
        if !self.f_is_zero() {
            if x == 0.0 || (y == 0.0 && self.f_at_zero != Some(0.0)) {
                return Err(Error::AxisSingularity { x, y });
            }
            out[0] = if y == 0.0 {
                self.f_prime.eval(&[0.0])? / (x * x * x)
            } else {
                self.big_f.derivative(y / x)? / (y * x * x)
            };
        }
        if !self.g_is_zero() {
            if y == 0.0 || (x == 0.0 && self.g_at_zero != Some(0.0)) {
                return Err(Error::AxisSingularity { x, y });
            }
            out[1] = if x == 0.0 {
                self.g_prime.eval(&[0.0])? / (y * y * y)
            } else {
                self.big_g.derivative(x / y)? / (x * y * y)
            };
        }
        Ok(out)
    }

    /// Angular part of the frequency function.
    pub fn sigma(&self, theta: f64) -> Result<f64> {
        if self.is_decoupled() {
            return Ok(0.0);
        }
        let (s, c) = theta.sin_cos();
        let (a, b, cc) = (self.form.a(), self.form.b(), self.form.c());
        let inv_psi_sq = self.form.direction(theta);
        let kappa = self.kappa();
        let axis = || Error::AxisSingularity { x: c, y: s };
        let mut sigma = 0.0;
        if !self.f_is_zero() {
            if c.abs() < AXIS_EPS {
                return Err(axis());
            }
            let ratio = if s.abs() < AXIS_EPS {
                if self.f_at_zero != Some(0.0) {
                    return Err(axis());
                }
                // f(tanθ)/sinθ → f'(0)/cosθ
                self.f_prime.eval(&[0.0])? / (c * c * c)
            } else {
                self.big_f.derivative(s / c)? / (s * c * c)
            };
            sigma += (a * c + b * s) * inv_psi_sq * ratio - 2.0 * kappa * self.big_f.eval(s / c)?;
        }
        if !self.g_is_zero() {
            if s.abs() < AXIS_EPS {
                return Err(axis());
            }
            let ratio = if c.abs() < AXIS_EPS {
                if self.g_at_zero != Some(0.0) {
                    return Err(axis());
                }
                self.g_prime.eval(&[0.0])? / (s * s * s)
            } else {
                self.big_g.derivative(c / s)? / (s * s * c)
            };
            sigma += (b * c + cc * s) * inv_psi_sq * ratio - 2.0 * kappa * self.big_g.eval(c / s)?;
        }
        Ok(sigma)
    }

    pub fn vbar(&self, r: f64, t: f64) -> Result<f64> {
        match &self.potential {
            Potential::Generic(p) => Ok(p.vbar.eval(&[r, t])?),
            Potential::PointSymmetric(p) => p.vbar(r, t),
        }
    }

    /// `∂V̄/∂R`.
    pub fn vbar_r(&self, r: f64, t: f64) -> Result<f64> {
        match &self.potential {
            Potential::Generic(p) => Ok(p.vbar_r.eval(&[r, t])?),
            Potential::PointSymmetric(p) => p.vbar_r(r, t),
        }
    }

    /// `∂V̄/∂t`.
    pub fn vbar_t(&self, r: f64, t: f64) -> Result<f64> {
        match &self.potential {
            Potential::Generic(p) => Ok(p.vbar_t.eval(&[r, t])?),
            Potential::PointSymmetric(p) => p.vbar_t(r, t),
        }
    }

    /// `ω² = (1/R) ∂V̄/∂R + σ(θ)/R⁴`; may be negative.
    pub fn omega_sq(&self, r: f64, theta: f64, t: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::InvalidArgument("R must be positive"));
        }
        Ok(self.vbar_r(r, t)? / r + self.sigma(theta)? / r.powi(4))
    }

    fn radius(&self, x: f64, y: f64) -> Result<f64> {
        let r2 = self.form.r_sq(x, y);
        if !(r2 > 0.0) {
            return Err(Error::DegenerateDirection { theta: y.atan2(x) });
        }
        Ok(r2.sqrt())
    }

    /// `V = V̄(R, t) + κ/R² (F(y/x) + G(x/y))`.
    pub fn potential_energy(&self, x: f64, y: f64, t: f64) -> Result<f64> {
        let r = self.radius(x, y)?;
        Ok(self.vbar(r, t)? + self.kappa() * self.coupling(x, y)? / (r * r))
    }

    /// `∇V` in Cartesian coordinates.
    pub fn potential_gradient(&self, x: f64, y: f64, t: f64) -> Result<[f64; 2]> {
        let r = self.radius(x, y)?;
        let mq = self.form.apply([x, y]);
        let kappa = self.kappa();
        let r2 = r * r;
        let radial = self.vbar_r(r, t)? / r - 2.0 * kappa * self.coupling(x, y)? / (r2 * r2);
        let dphi = self.coupling_gradient(x, y)?;
        Ok([
            radial * mq[0] + kappa * dphi[0] / r2,
            radial * mq[1] + kappa * dphi[1] / r2,
        ])
    }

    /// `∂V/∂t` (only `V̄` carries explicit time dependence).
    pub fn potential_dt(&self, x: f64, y: f64, t: f64) -> Result<f64> {
        let r = self.radius(x, y)?;
        self.vbar_t(r, t)
    }
}

/// Free-function spelling of [`ErmakovModel::validate`].
pub fn validate_model(spec: &ModelSpec) -> Result<ErmakovModel> {
    ErmakovModel::validate(spec)
}

pub fn sigma(theta: f64, m: &ErmakovModel) -> Result<f64> {
    m.sigma(theta)
}

pub fn omega_sq(r: f64, theta: f64, t: f64, m: &ErmakovModel) -> Result<f64> {
    m.omega_sq(r, theta, t)
}

pub fn potential(x: f64, y: f64, t: f64, m: &ErmakovModel) -> Result<f64> {
    m.potential_energy(x, y, t)
}
