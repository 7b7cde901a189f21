mod common;

use std::time::Instant;

use common::{max_norm, states};
use ermakov_core::dynamics::{integrate_sampled, IntegratorConfig};
use ermakov_core::fixtures::{self, Fixture};
use ermakov_core::invariants::{ermakov_i_cart, noether_j};
use ermakov_core::solver::*;
use ermakov_core::{CartesianState, Error};

fn times(t_end: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|k| t_end * k as f64 / n as f64).collect()
}

fn compare(m: &ermakov_core::ErmakovModel, init: &CartesianState, t_end: f64) -> f64 {
    let ts = times(t_end, 100);
    let quad = solve_by_quadrature(m, init, &ts).unwrap();
    let direct = integrate_sampled(m, init, &ts, &IntegratorConfig::with_tolerance(1e-12)).unwrap();
    quad.states()
        .zip(direct.states())
        .map(|(a, b)| max_norm(a, b))
        .fold(0.0, f64::max)
}

#[test]
fn iso_ho_oscillatory() {
    let m = fixtures::iso_ho();
    let init = CartesianState::new(1.0, 0.0, 0.5f64.sqrt(), 1.0, 0.0);
    assert!((noether_j(&init, &m).unwrap() - 1.25).abs() < 1e-14);
    let err = compare(&m, &init, 10.0);
    assert!(err < 1e-6, "{err}");
}

#[test]
fn iso_ho_circular() {
    let m = fixtures::iso_ho();
    let init = CartesianState::new(1.0, 0.0, 0.0, 1.0, 0.0);
    assert!((noether_j(&init, &m).unwrap() - 1.0).abs() < 1e-14);
    let i = ermakov_i_cart(&init, &m).unwrap();
    let sol = solve_radial(&m, i, 1.0, 1.0, 0.0, 10.0).unwrap();
    assert!(sol.is_constant());
    let err = compare(&m, &init, 10.0);
    assert!(err < 1e-6, "{err}");
}

#[test]
fn kepler_orbits() {
    let m = fixtures::kepler();
    for l in [1.0, 1.1, 0.9] {
        let init = CartesianState::new(1.0, 0.0, 0.05, l, 0.0);
        let err = compare(&m, &init, 10.0);
        assert!(err < 1e-6, "L = {l}: {err}");
    }
}

#[test]
fn radial_period_matches_oscillator() {
    // W = s²/2 + 1/(2 s²) with I = 1/2: period of R̄ is π
    let m = fixtures::iso_ho();
    let sol = solve_radial(&m, 0.5, 1.25, 1.0, 0.5f64.sqrt(), 10.0).unwrap();
    let p = sol.period().unwrap();
    assert!((p - std::f64::consts::PI).abs() < 1e-10, "{p}");
    let tp = sol.turning_points();
    assert_eq!(tp.len(), 2);
    // turning points solve 1.25 = s²/2 + 1/(2 s²)
    for s in tp {
        let w = 0.5 * s * s + 0.5 / (s * s);
        assert!((w - 1.25).abs() < 1e-12, "{s}");
    }
}

#[test]
fn radial_energy_is_preserved() {
    let m = fixtures::kepler();
    let (i, j) = (0.5 * 1.1 * 1.1, 0.5 * 0.01 + 0.5 * 1.21 - 1.0);
    let sol = solve_radial(&m, i, j, 1.0, 0.1, 20.0).unwrap();
    let w = EffectivePotential::new(&m, i).unwrap();
    for k in 0..=200 {
        let p = sol.eval(0.1 * k as f64).unwrap();
        let e = 0.5 * p.rbar_dot * p.rbar_dot + w.value(p.rbar).unwrap();
        assert!((e - j).abs() < 1e-9, "{k}: {e} vs {j}");
    }
}

#[test]
fn open_orbit_escapes() {
    let m = fixtures::kepler();
    let init = CartesianState::new(1.0, 0.0, 1.0, 1.2, 0.0);
    assert!(noether_j(&init, &m).unwrap() > 0.0);
    let err = compare(&m, &init, 5.0);
    assert!(err < 1e-6, "{err}");
}

#[test]
fn inconsistent_energy_is_rejected() {
    let m = fixtures::iso_ho();
    let r = solve_radial(&m, 0.5, 0.9, 1.0, 0.0, 1.0);
    assert!(matches!(r, Err(Error::InconsistentEnergy { .. } | Error::ForbiddenRegion { .. })), "{r:?}");
}

#[test]
fn generic_model_is_rejected() {
    let m = ermakov_core::model::ErmakovModel::validate(&ermakov_core::ModelSpec::new(
        (1.0, 0.0, 1.0),
        "0",
        "0",
        ermakov_core::PotentialSpec::Generic { vbar: "R^2/2".into() },
    ))
    .unwrap();
    let init = CartesianState::new(1.0, 0.0, 0.0, 1.0, 0.0);
    assert_eq!(solve_by_quadrature(&m, &init, &[0.0, 1.0]).unwrap_err(), Error::NotPointSymmetric);
}

#[test]
fn rescaled_time_of_breathing_rho() {
    // ∫ dt/(1+t²) = atan t
    let m = fixtures::breathing_kepler();
    let ps = m.point_symmetric().unwrap();
    for t in [0.5, 2.0, 7.0] {
        let v = rescale_time(ps, 0.0, t).unwrap();
        assert!((v - t.atan()).abs() < 1e-12);
    }
}

#[test]
fn angular_closed_form_for_round_metric() {
    let m = fixtures::iso_ho();
    // decoupled with identity form: θ = θ₀ + sign·√(2I)·S
    let th = solve_angular(&m, 0.5, 0.3, 1.0, &[0.0, 1.0, 2.5]).unwrap();
    for (s, t) in [0.0, 1.0, 2.5].iter().zip(th) {
        assert!((t - 0.3 - s).abs() < 1e-12);
    }
}

#[test]
fn coupled_fixtures_agree_with_direct() {
    for fixture in [Fixture::Goedert, Fixture::Wobble, Fixture::BreathingKepler] {
        let m = fixture.model();
        let (mut checked, mut turned) = (0, 0);
        for init in states(fixture, 6, 5) {
            let ts = times(0.5, 10);
            let quad = match solve_by_quadrature(&m, &init, &ts) {
                Ok(q) => q,
                Err(Error::AngularTurning { .. }) => {
                    let fine = times(0.5, 200);
                    let direct = integrate_sampled(&m, &init, &fine, &IntegratorConfig::with_tolerance(1e-12)).unwrap();
                    let l0 = init.angular_momentum();
                    assert!(
                        direct.states().any(|s| s.angular_momentum() * l0 <= 0.0),
                        "{}: turning reported but the angular rate keeps its sign",
                        fixture.name()
                    );
                    turned += 1;
                    continue;
                }
                Err(e) => panic!("{}: {e}", fixture.name()),
            };
            let direct = integrate_sampled(&m, &init, &ts, &IntegratorConfig::with_tolerance(1e-12)).unwrap();
            let err = quad.states().zip(direct.states()).map(|(a, b)| max_norm(a, b)).fold(0.0, f64::max);
            assert!(err < 1e-6, "{}: {err}", fixture.name());
            checked += 1;
        }
        assert!(checked >= 1 && checked + turned == 6, "{}: {checked}/{turned}", fixture.name());
    }
}

#[test]
fn quadrature_runtime() {
    let start = Instant::now();
    let m = fixtures::iso_ho();
    compare(&m, &CartesianState::new(1.0, 0.0, 0.5f64.sqrt(), 1.0, 0.0), 10.0);
    compare(&fixtures::kepler(), &CartesianState::new(1.0, 0.0, 0.05, 1.1, 0.0), 10.0);
    assert!(start.elapsed().as_secs_f64() < 5.0);
}

#[test]
fn start_at_a_turning_point() {
    // pericentre of a bound orbit and of an escaping one, plus a nudge off each
    let m = fixtures::kepler();
    for (xd, yd) in [(0.0, 1.05), (1e-9, 1.05), (-1e-9, 1.05), (0.0, 1.5), (1e-9, 1.5)] {
        let err = compare(&m, &CartesianState::new(1.0, 0.0, xd, yd, 0.0), 5.0);
        assert!(err < 1e-9, "({xd}, {yd}): {err}");
    }
    // apocentre
    let err = compare(&m, &CartesianState::new(1.0, 0.0, 0.0, 0.9, 0.0), 5.0);
    assert!(err < 1e-9, "{err}");
}
