//! Reference models used by tests, benchmarks and the CLI.

use core::f64::consts::TAU;

#[allow(unused_imports)]
use num_traits::Float;

use crate::geometry::CartesianState;
use crate::model::{ErmakovModel, ModelSpec, USpec};

const IDENTITY: (f64, f64, f64) = (1.0, 0.0, 1.0);

fn build(spec: ModelSpec) -> ErmakovModel {
    ErmakovModel::validate(&spec).expect("fixture model is valid")
}

/// Isotropic harmonic oscillator, `U = s²/2`, `ρ = 1`, no coupling.
pub fn iso_ho_spec() -> ModelSpec {
    ModelSpec::point_symmetric(IDENTITY, "0", "0", "1", USpec::Expr("s^2/2".into()))
}

/// Kepler problem, `U = -1/s`, `ρ = 1`, no coupling.
pub fn kepler_spec() -> ModelSpec {
    ModelSpec::point_symmetric(
        IDENTITY,
        "0",
        "0",
        "1",
        USpec::InverseSquareCoulomb { a: 0.0, b: 1.0 },
    )
}

/// Indefinite form `2xy` with `f = g = λ` and `U = s²/2 + 2/s²`.
pub fn goedert_spec() -> ModelSpec {
    ModelSpec::point_symmetric(
        (0.0, 1.0, 0.0),
        "lambda",
        "lambda",
        "1",
        USpec::InverseSquareHarmonic { a: 2.0, c: 1.0 },
    )
}

/// Identity form, `f = λ`, `g = 0`, harmonic `U`.
pub fn gen_fg_spec() -> ModelSpec {
    ModelSpec::point_symmetric(IDENTITY, "lambda", "0", "1", USpec::Expr("s^2/2".into()))
}

/// Kepler `U` with the breathing scale `ρ = √(1 + t²)`.
pub fn breathing_kepler_spec() -> ModelSpec {
    ModelSpec::point_symmetric(IDENTITY, "0", "0", "sqrt(1 + t^2)", USpec::Expr("-1/s".into()))
}

/// Skewed definite form, both couplings, quartic `U`, oscillating `ρ`.
pub fn wobble_spec() -> ModelSpec {
    ModelSpec::point_symmetric(
        (2.0, 0.5, 1.0),
        "lambda",
        "lambda^3",
        "1 + 0.2*sin(t)",
        USpec::Expr("s^4/4 + s^2/2".into()),
    )
}

pub fn iso_ho() -> ErmakovModel {
    build(iso_ho_spec())
}

pub fn kepler() -> ErmakovModel {
    build(kepler_spec())
}

pub fn goedert() -> ErmakovModel {
    build(goedert_spec())
}

pub fn gen_fg() -> ErmakovModel {
    build(gen_fg_spec())
}

pub fn breathing_kepler() -> ErmakovModel {
    build(breathing_kepler_spec())
}

pub fn wobble() -> ErmakovModel {
    build(wobble_spec())
}

/// Named reference models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Fixture {
    IsoHo,
    Kepler,
    Goedert,
    GenFg,
    BreathingKepler,
    Wobble,
}

impl Fixture {
    pub const ALL: [Fixture; 6] = [
        Fixture::IsoHo,
        Fixture::Kepler,
        Fixture::Goedert,
        Fixture::GenFg,
        Fixture::BreathingKepler,
        Fixture::Wobble,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Fixture::IsoHo => "iso_ho",
            Fixture::Kepler => "kepler",
            Fixture::Goedert => "goedert",
            Fixture::GenFg => "gen_fg",
            Fixture::BreathingKepler => "breathing_kepler",
            Fixture::Wobble => "wobble",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == name)
    }

    pub fn spec(self) -> ModelSpec {
        match self {
            Fixture::IsoHo => iso_ho_spec(),
            Fixture::Kepler => kepler_spec(),
            Fixture::Goedert => goedert_spec(),
            Fixture::GenFg => gen_fg_spec(),
            Fixture::BreathingKepler => breathing_kepler_spec(),
            Fixture::Wobble => wobble_spec(),
        }
    }

    pub fn model(self) -> ErmakovModel {
        build(self.spec())
    }

    /// Maps `u ∈ [0, 1)⁴` to an initial state at `t = 0` whose motion stays
    /// clear of collisions and singular axes (for `gen_fg` this needs `I > 0`,
    /// since `F(y/x) ≥ -½` can otherwise make the `κI/R²` core attractive).
    pub fn sample_state(self, u: [f64; 4]) -> CartesianState {
        let lerp = |u: f64, lo: f64, hi: f64| lo + (hi - lo) * u;
        // ±[lo, hi]
        let signed = |u: f64, lo: f64, hi: f64| {
            let w = 2.0 * u - 1.0;
            (lo + (hi - lo) * w.abs()).copysign(w)
        };
        let (phi, r, v_r, l) = match self {
            Fixture::IsoHo => (lerp(u[0], 0.0, TAU), lerp(u[1], 0.6, 1.5), lerp(u[2], -0.5, 0.5), signed(u[3], 0.2, 1.5)),
            Fixture::Kepler | Fixture::BreathingKepler => {
                let r = lerp(u[1], 0.8, 1.2);
                (lerp(u[0], 0.0, TAU), r, lerp(u[2], -0.2, 0.2), lerp(u[3], 0.85, 1.1) * r.sqrt())
            }
            Fixture::Goedert => (
                lerp(u[0], 0.7, 1.4).atan(),
                lerp(u[1], 0.6, 1.5),
                lerp(u[2], -0.5, 0.5),
                lerp(u[3], -1.1, 1.1),
            ),
            Fixture::GenFg => (lerp(u[0], -1.0, 1.0), lerp(u[1], 0.6, 1.5), lerp(u[2], -0.5, 0.5), signed(u[3], 1.1, 1.5)),
            Fixture::Wobble => (
                lerp(u[0], 0.5, 2.0).atan(),
                lerp(u[1], 0.6, 1.2),
                lerp(u[2], -0.5, 0.5),
                signed(u[3], 0.3, 1.0),
            ),
        };
        let (s, c) = phi.sin_cos();
        CartesianState::new(r * c, r * s, v_r * c - l / r * s, v_r * s + l / r * c, 0.0)
    }
}

