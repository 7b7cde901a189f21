mod common;

use common::{rel, rng};
use ermakov_core::fixtures::{self, Fixture};
use ermakov_core::invariants::*;
use ermakov_core::model::{ErmakovModel, ModelSpec, PotentialSpec};
use ermakov_core::{CartesianState, QuadraticForm};
use rand::{RngExt, SeedableRng};

fn generic(f: &str, g: &str) -> ErmakovModel {
    ErmakovModel::validate(&ModelSpec::new((1.0, 0.0, 1.0), f, g, PotentialSpec::Generic { vbar: "0".into() })).unwrap()
}

#[test]
fn ermakov_i_examples() {
    let m = generic("0", "0");
    assert_eq!(ermakov_i_cart(&CartesianState::new(1.0, 0.0, 0.0, 1.0, 0.0), &m).unwrap(), 0.5);
    assert_eq!(ermakov_i_cart(&CartesianState::new(1.0, 1.0, 2.0, 2.0, 0.0), &m).unwrap(), 0.0);
    let m = generic("lambda", "0");
    let i = ermakov_i_cart(&CartesianState::new(1.0, 2.0, 0.0, 0.0, 0.0), &m).unwrap();
    assert!((i - 1.5).abs() < 1e-14);
}

#[test]
fn polar_examples() {
    let m = generic("0", "0");
    let p = ermakov_core::PolarState { r: 1.0, theta: 0.0, r_dot: 0.0, theta_dot: 1.0, t: 0.0 };
    assert_eq!(ermakov_i_polar(&p, &m).unwrap(), 0.5);

    let goedert = ErmakovModel::validate(&ModelSpec::new((0.0, 1.0, 0.0), "0", "0", PotentialSpec::Generic { vbar: "0".into() })).unwrap();
    let s = CartesianState::new(0.8, 0.6, 0.3, -0.2, 0.0);
    let p = goedert.form().to_polar(&s).unwrap();
    let psi_sq = 1.0 / (2.0 * p.theta.sin() * p.theta.cos());
    let expected = 0.5 * p.r.powi(4) * psi_sq * psi_sq * p.theta_dot * p.theta_dot;
    assert!(rel(ermakov_i_polar(&p, &goedert).unwrap(), expected) < 1e-13);
    assert!(rel(ermakov_i_cart(&s, &goedert).unwrap(), expected) < 1e-12);
}

#[test]
fn polar_matches_cartesian_on_random_forms() {
    let couplings = [("0", "0"), ("lambda", "0"), ("lambda", "lambda^3"), ("1/(1+lambda^2)", "exp(-lambda^2)")];
    let mut rng = rng(11);
    for k in 0..1000 {
        let a = rng.random_range(0.3..3.0);
        let c = rng.random_range(0.3..3.0);
        let b = rng.random_range(-0.9..0.9) * f64::sqrt(a * c);
        let (f, g) = couplings[k % couplings.len()];
        let m = ErmakovModel::validate(&ModelSpec::new((a, b, c), f, g, PotentialSpec::Generic { vbar: "R^2".into() })).unwrap();
        let phi = rng.random_range(0.1..1.4) + if rng.random::<bool>() { std::f64::consts::PI } else { 0.0 };
        let r = rng.random_range(0.3..2.0);
        let s = CartesianState::new(r * phi.cos(), r * phi.sin(), rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), 0.0);
        let i_cart = ermakov_i_cart(&s, &m).unwrap();
        let i_polar = ermakov_i_polar(&m.form().to_polar(&s).unwrap(), &m).unwrap();
        assert!((i_cart - i_polar).abs() <= 1e-12 * i_cart.abs().max(1.0), "{i_cart} vs {i_polar}");
    }
}

#[test]
fn noether_j_examples() {
    let circular = CartesianState::new(1.0, 0.0, 0.0, 1.0, 0.0);
    for t in [0.0, 3.0, -2.0] {
        let s = CartesianState { t, ..circular };
        assert!((noether_j(&s, &fixtures::iso_ho()).unwrap() - 1.0).abs() < 1e-15);
        assert!((noether_j(&s, &fixtures::kepler()).unwrap() + 0.5).abs() < 1e-15);
    }
    let s = CartesianState::new(1.0, 0.0, 1.0, 1.0, 0.0);
    assert!((noether_j(&s, &fixtures::iso_ho()).unwrap() - 1.5).abs() < 1e-15);
    let generic = generic("0", "0");
    assert!(matches!(noether_j(&circular, &generic), Err(ermakov_core::Error::NotPointSymmetric)));
}

#[test]
fn hamiltonian_examples() {
    let circular = CartesianState::new(1.0, 0.0, 0.0, 1.0, 0.0);
    assert!((hamiltonian(&circular, &fixtures::iso_ho()).unwrap() - 1.0).abs() < 1e-15);
    let m = fixtures::iso_ho();
    let p = momenta(&CartesianState::new(1.0, 0.0, 1.0, 0.0, 0.0), &m);
    assert_eq!(p, [1.0, 0.0]);
    let h = hamiltonian_phase_space(0.0, 0.0 + 1e-300, 1.0, 0.0, 0.0, &fixtures::wobble());
    assert!(h.is_err() || h.unwrap().is_finite());
}

#[test]
fn phase_space_hamiltonian_agrees() {
    for fixture in Fixture::ALL {
        let m = fixture.model();
        let mut rng = rng(5);
        for s in common::states(fixture, 200, 3) {
            let s = CartesianState { t: rng.random_range(-3.0..3.0), ..s };
            let hv = hamiltonian(&s, &m).unwrap();
            let p = momenta(&s, &m);
            let hp = hamiltonian_phase_space(s.x, s.y, p[0], p[1], s.t, &m).unwrap();
            assert!((hv - hp).abs() <= 1e-12 * hv.abs().max(1.0), "{}: {hv} vs {hp}", fixture.name());
        }
    }
}

#[test]
fn constant_rho_hamiltonian_equals_j() {
    for fixture in [Fixture::IsoHo, Fixture::Kepler, Fixture::Goedert, Fixture::GenFg] {
        let m = fixture.model();
        for s in common::states(fixture, 100, 9) {
            let h = hamiltonian(&s, &m).unwrap();
            let j = noether_j(&s, &m).unwrap();
            assert!((h - j).abs() <= 1e-12 * h.abs().max(1.0));
        }
    }
}

#[test]
fn lower_limit_shifts_i_by_a_constant() {
    let base = ModelSpec::new((1.0, 0.0, 1.0), "lambda^2", "0", PotentialSpec::Generic { vbar: "0".into() });
    let shifted = ModelSpec { f_lower: 2.0, ..base.clone() };
    let (m0, m1) = (ErmakovModel::validate(&base).unwrap(), ErmakovModel::validate(&shifted).unwrap());
    // -∫₁² λ² dλ
    let expected = -7.0 / 3.0;
    for s in [CartesianState::new(1.0, 0.5, 0.2, 0.1, 0.0), CartesianState::new(-0.3, 1.2, 1.0, -2.0, 0.0)] {
        let d = ermakov_i_cart(&s, &m1).unwrap() - ermakov_i_cart(&s, &m0).unwrap();
        assert!((d - expected).abs() < 1e-12);
    }
}

#[test]
fn axis_states_are_rejected() {
    let m = fixtures::gen_fg();
    assert!(matches!(
        ermakov_i_cart(&CartesianState::new(0.0, 1.0, 0.0, 0.0, 0.0), &m),
        Err(ermakov_core::Error::AxisSingularity { .. })
    ));
    assert!(ermakov_i_cart(&CartesianState::new(1.0, 0.0, 0.0, 1.0, 0.0), &m).is_ok());
    let _ = QuadraticForm::IDENTITY;
    let _ = rand_chacha::ChaCha8Rng::seed_from_u64(0);
}
