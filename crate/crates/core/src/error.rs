use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Errors raised while parsing or evaluating an expression.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("function `{name}` takes {expected} argument(s), found {found} (byte {offset})")]
    Arity {
        name: String,
        offset: usize,
        expected: usize,
        found: usize,
    },
    #[error("variable `{0}` is not bound")]
    Unbound(String),
    #[error("domain error in `{expr}`: {reason}")]
    Domain { expr: String, reason: &'static str },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("quadratic form is not positive along theta = {theta}")]
    DegenerateDirection { theta: f64 },
    #[error("quadrature did not reach tolerance on [{a}, {b}] (error estimate {estimate:e})")]
    QuadratureFailure { a: f64, b: f64, estimate: f64 },
    #[error("invalid model: {}", .0.join("; "))]
    Validation(Vec<String>),
    #[error("state ({x}, {y}) is on or too close to a singular coordinate axis")]
    AxisSingularity { x: f64, y: f64 },
    #[error("rho({t}) = {rho} is not positive")]
    NonPositiveRho { t: f64, rho: f64 },
    #[error("step size {h:e} underflowed at t = {t}")]
    StepUnderflow { t: f64, h: f64 },
    #[error("step limit {steps} reached at t = {t}")]
    TooManySteps { t: f64, steps: usize },
    #[error("initial data inconsistent with energy: J - W = {expected}, half velocity squared = {found}")]
    InconsistentEnergy { expected: f64, found: f64 },
    #[error("initial radius {r} lies in the forbidden region (J - W = {deficit})")]
    ForbiddenRegion { r: f64, deficit: f64 },
    #[error("radial motion has no turning point {0}")]
    NoTurningPoint(&'static str),
    #[error("angular motion turns at theta = {theta}")]
    AngularTurning { theta: f64 },
    #[error("alpha vanishes at t = {t}")]
    AlphaVanishes { t: f64 },
    #[error("operation requires a point-symmetric model")]
    NotPointSymmetric,
    #[error("potential is not in a linearisable family")]
    NotLinearisable,
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
}
