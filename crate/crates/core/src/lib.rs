//! Numerical laboratory for Lagrangian Ermakov systems.
//!
//! A system is built from a constant quadratic form `(A, B, C)`, two coupling
//! functions `f(y/x)` and `g(x/y)`, and a potential that is either a generic
//! `V̄(R, t)` or the point-symmetric family parameterised by `ρ(t)` and `U(s)`.
//! The crate evaluates the Ermakov invariant `I`, the Noether invariant `J`
//! and the Hamiltonian, integrates the equations of motion with drift
//! monitoring, checks Noether symmetries and involution, and solves the
//! point-symmetric family by quadratures and by linearisation.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod dynamics;
pub mod error;
pub mod expr;
pub mod fixtures;
pub mod geometry;
pub mod invariants;
pub mod linearize;
pub mod model;
pub mod noether;
pub mod ode;
pub mod quad;
pub mod roots;
pub mod solver;

pub use error::{Error, ExprError, Result};
pub use expr::{Antiderivative, Expr};
pub use geometry::{CartesianState, PolarState, QuadraticForm};
pub use model::{ErmakovModel, ModelSpec, PotentialSpec, USpec};
