mod common;

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use common::{max_norm, rng, states};
use ermakov_core::dynamics::{eom_rhs, integrate, integrate_sampled, IntegratorConfig};
use ermakov_core::fixtures::{self, Fixture};
use ermakov_core::invariants::{ermakov_i_cart, ermakov_i_polar, hamiltonian, hamiltonian_phase_space, momenta, noether_j};
use ermakov_core::linearize::{alpha_solve, classify_linearisable, quasi_linear_residual, solve_by_linearisation, LinearisableClass};
use ermakov_core::model::{ErmakovModel, ModelSpec, PotentialSpec, USpec};
use ermakov_core::noether::*;
use ermakov_core::solver::solve_by_quadrature;
use ermakov_core::{CartesianState, Error};
use rand::RngExt;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn grid(t_end: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|k| t_end * k as f64 / n as f64).collect()
}

fn drift_runs(fixtures: &[Fixture]) -> (f64, f64, f64) {
    let cfg = IntegratorConfig::with_tolerance(1e-10);
    let (mut i_worst, mut j_worst, mut h_worst) = (0.0f64, 0.0f64, 0.0f64);
    for &fixture in fixtures {
        let m = fixture.model();
        let constant_rho = m.point_symmetric().unwrap().rho_is_constant();
        for init in states(fixture, 10, 2024) {
            let tr = integrate(&m, &init, 20.0, &cfg).unwrap();
            let report = tr.drift_report();
            i_worst = i_worst.max(report.i.max_rel);
            j_worst = j_worst.max(report.j.unwrap().max_rel);
            if constant_rho {
                h_worst = h_worst.max(report.h.unwrap().max_rel);
            }
        }
    }
    (i_worst, j_worst, h_worst)
}

fn ermakov_conservation(extra: &mut (f64, f64)) -> Outcome {
    let started = Instant::now();
    let core = [Fixture::IsoHo, Fixture::Kepler, Fixture::Goedert, Fixture::GenFg];
    let (i, j, h) = drift_runs(&core);
    let elapsed = started.elapsed().as_secs_f64();
    *extra = (j, h);
    outcome(i <= 1e-8 && elapsed < 10.0, format!("max relative I drift {i:.2e} over 40 runs in {elapsed:.2} s"))
}

fn noether_conservation(core: (f64, f64)) -> Outcome {
    let (_, j, _) = drift_runs(&[Fixture::BreathingKepler, Fixture::Wobble]);
    let j = j.max(core.0);
    outcome(j <= 1e-8, format!("max relative J drift {j:.2e} over 60 runs, including rho = sqrt(1+t^2)"))
}

fn noether_criterion() -> Outcome {
    let mut rng = rng(3);
    let per = 1000 / Fixture::ALL.len() + 1;
    let (mut worst, mut control, mut count) = (0.0f64, 0.0f64, 0);
    for fixture in Fixture::ALL {
        let m = fixture.model();
        for s in states(fixture, per, 77) {
            if count == 1000 {
                break;
            }
            let s = CartesianState { t: rng.random_range(-3.0..3.0), ..s };
            let lag = FlowPoint::new(&s, &m).unwrap().lagrangian().unwrap().value;
            let r = noether_residual(&PointSymmetry::default(), &s, &m).unwrap();
            worst = worst.max(r.abs() / (1.0 + lag.abs()));
            let bad = noether_residual(&PointSymmetry { gauge: Gauge::Corrupted(0.5) }, &s, &m).unwrap();
            control = control.max(bad.abs());
            count += 1;
        }
    }
    outcome(
        worst <= 1e-9 && control > 1e-3 && count == 1000,
        format!("max scaled residual {worst:.2e} at {count} states; corrupted gauge residual {control:.2e}"),
    )
}

fn converse_theorem() -> Outcome {
    let mut rng = rng(8);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let a = rng.random_range(0.3..3.0);
        let c = rng.random_range(0.3..3.0);
        let b = rng.random_range(-0.9..0.9) * f64::sqrt(a * c);
        let m = ErmakovModel::validate(&ModelSpec::point_symmetric((a, b, c), "lambda", "lambda^3", "1", USpec::Expr("s^2/2".into()))).unwrap();
        let phi: f64 = rng.random_range(0.2..1.3);
        let r = rng.random_range(0.5..1.5);
        let s = CartesianState::new(r * phi.cos(), r * phi.sin(), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), 0.0);
        let polar = m.form().to_polar(&s).unwrap();
        let p = FlowPoint::new(&s, &m).unwrap();
        for tau in TauChoice::ALL {
            let g = ConverseGenerator::new(tau).evaluate(&p).unwrap();
            let (dr, dtheta) = polar_variation([g.eta[0].value, g.eta[1].value], &s, &m).unwrap();
            let (er, etheta) = converse_polar(tau.polar_value(&polar), &polar, m.kappa());
            worst = worst.max((dr - er).abs() / er.abs().max(1.0));
            worst = worst.max((dtheta - etheta).abs() / etheta.abs().max(1.0));
        }
    }
    outcome(worst <= 1e-10, format!("max component mismatch {worst:.2e} at 100 states x 3 tau choices"))
}

fn involution() -> Outcome {
    let (mut ij, mut canon, mut ii) = (0.0f64, 0.0f64, 0.0f64);
    for fixture in Fixture::ALL {
        let m = fixture.model();
        for s in states(fixture, 100, 44) {
            let s = CartesianState { t: 0.9, ..s };
            let p = PhasePoint::from_state(&s, &m);
            ij = ij.max(poisson_bracket(PhaseFunction::I, PhaseFunction::J, &p, &m).unwrap().abs());
            canon = canon.max((poisson_bracket(PhaseFunction::X, PhaseFunction::Px, &p, &m).unwrap() - 1.0).abs());
            ii = ii.max(poisson_bracket(PhaseFunction::I, PhaseFunction::I, &p, &m).unwrap().abs());
        }
    }
    outcome(
        ij <= 1e-8 && canon <= 1e-12 && ii <= 1e-12,
        format!("max |{{I,J}}| {ij:.2e}; |{{x,px}} - 1| {canon:.2e}; |{{I,I}}| {ii:.2e}"),
    )
}

fn quadratures() -> Outcome {
    let started = Instant::now();
    let cfg = IntegratorConfig::with_tolerance(1e-12);
    let ts = grid(10.0, 200);
    let cases = [
        ("iso_ho J=1.25", fixtures::iso_ho(), CartesianState::new(1.0, 0.0, 0.5f64.sqrt(), 1.0, 0.0)),
        ("iso_ho J=1", fixtures::iso_ho(), CartesianState::new(1.0, 0.0, 0.0, 1.0, 0.0)),
        ("kepler", fixtures::kepler(), CartesianState::new(1.0, 0.0, 0.05, 1.1, 0.0)),
    ];
    let mut parts = Vec::new();
    let mut worst = 0.0f64;
    for (name, m, init) in cases {
        let quad = solve_by_quadrature(&m, &init, &ts).unwrap();
        let direct = integrate_sampled(&m, &init, &ts, &cfg).unwrap();
        let err = quad.states().zip(direct.states()).map(|(a, b)| max_norm(a, b)).fold(0.0, f64::max);
        worst = worst.max(err);
        parts.push(format!("{name} {err:.1e}"));
    }
    let elapsed = started.elapsed().as_secs_f64();
    outcome(worst <= 1e-6 && elapsed < 5.0, format!("max-norm error {} in {elapsed:.2} s", parts.join(", ")))
}

fn linearization() -> Outcome {
    let mut conic = 0.0f64;
    for l in [1.0f64, 1.1] {
        let e = l * l - 1.0;
        let tr = solve_by_linearisation(&fixtures::kepler(), &CartesianState::new(1.0, 0.0, 0.0, l, 0.0), &grid(20.0, 400)).unwrap();
        for s in tr.states() {
            let exact = l * l / (1.0 + e * s.y.atan2(s.x).cos());
            conic = conic.max((s.x.hypot(s.y) - exact).abs());
        }
    }

    let cfg = IntegratorConfig::with_tolerance(1e-12);
    let mut residual = 0.0f64;
    for (fixture, t_end) in [(Fixture::Kepler, 10.0), (Fixture::BreathingKepler, 10.0), (Fixture::IsoHo, 1.4), (Fixture::Goedert, 1.4)] {
        let m = fixture.model();
        let cls = classify_linearisable(&m).unwrap().class;
        let alpha = alpha_solve(&m, &cls, 0.0, t_end).unwrap();
        for init in states(fixture, 5, 31) {
            let tr = integrate_sampled(&m, &init, &grid(t_end, 50), &cfg).unwrap();
            for s in tr.states() {
                match quasi_linear_residual(s, &m, &cls, &alpha) {
                    Ok(r) => residual = residual.max(r.abs()),
                    Err(Error::AngularTurning { .. }) => {}
                    Err(_) => residual = f64::INFINITY,
                }
            }
        }
    }

    let quartic = ErmakovModel::validate(&ModelSpec::point_symmetric((1.0, 0.0, 1.0), "0", "0", "1", USpec::Expr("s^4".into()))).unwrap();
    let tags = classify_linearisable(&quartic).unwrap().class == LinearisableClass::NotLinearisable
        && classify_linearisable(&fixtures::kepler()).unwrap().class == LinearisableClass::U1 { a: 0.0, b: 1.0 }
        && classify_linearisable(&fixtures::goedert()).unwrap().class == LinearisableClass::U2 { a: 2.0, c: 1.0 };

    outcome(
        conic <= 1e-8 && residual <= 1e-6 && tags,
        format!("conic error {conic:.2e}; max residual {residual:.2e}; tags {}", if tags { "exact" } else { "wrong" }),
    )
}

fn representation_equality() -> Outcome {
    let couplings = [("0", "0"), ("lambda", "0"), ("lambda", "lambda^3"), ("1/(1+lambda^2)", "exp(-lambda^2)")];
    let mut rng = rng(11);
    let mut worst = 0.0f64;
    for k in 0..1000 {
        let a = rng.random_range(0.3..3.0);
        let c = rng.random_range(0.3..3.0);
        let b = rng.random_range(-0.9..0.9) * f64::sqrt(a * c);
        let (f, g) = couplings[k % couplings.len()];
        let m = ErmakovModel::validate(&ModelSpec::new((a, b, c), f, g, PotentialSpec::Generic { vbar: "R^2".into() })).unwrap();
        let phi = rng.random_range(0.1..1.4) + if rng.random::<bool>() { PI } else { 0.0 };
        let r = rng.random_range(0.3..2.0);
        let s = CartesianState::new(r * phi.cos(), r * phi.sin(), rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), 0.0);
        let i_cart = ermakov_i_cart(&s, &m).unwrap();
        let i_polar = ermakov_i_polar(&m.form().to_polar(&s).unwrap(), &m).unwrap();
        worst = worst.max((i_cart - i_polar).abs() / i_cart.abs().max(1.0));
    }
    outcome(worst <= 1e-12, format!("max relative difference {worst:.2e} at 1000 states"))
}

fn hamiltonian_consistency(h_drift: f64) -> Outcome {
    let mut rng = rng(5);
    let (mut forms, mut hj) = (0.0f64, 0.0f64);
    for fixture in Fixture::ALL {
        let m = fixture.model();
        let constant_rho = m.point_symmetric().unwrap().rho_is_constant();
        for s in states(fixture, 200, 3) {
            let s = CartesianState { t: rng.random_range(-3.0..3.0), ..s };
            let hv = hamiltonian(&s, &m).unwrap();
            let p = momenta(&s, &m);
            let hp = hamiltonian_phase_space(s.x, s.y, p[0], p[1], s.t, &m).unwrap();
            forms = forms.max((hv - hp).abs() / hv.abs().max(1.0));
            if constant_rho {
                hj = hj.max((hv - noether_j(&s, &m).unwrap()).abs() / hv.abs().max(1.0));
            }
        }
    }
    outcome(
        forms <= 1e-12 && hj <= 1e-12 && h_drift <= 1e-8,
        format!("velocity vs phase-space {forms:.2e}; |H - J| {hj:.2e}; H drift {h_drift:.2e}"),
    )
}

fn eom_keystone() -> Outcome {
    let mut rng = rng(19);
    let per = 1000 / Fixture::ALL.len() + 1;
    let (mut worst, mut count) = (0.0f64, 0);
    for fixture in Fixture::ALL {
        let m = fixture.model();
        for s in states(fixture, per, 17) {
            if count == 1000 {
                break;
            }
            let s = CartesianState { t: rng.random_range(-2.0..2.0), ..s };
            let a = eom_rhs(&s, &m).unwrap();
            let v = |x: f64, y: f64| m.potential_energy(x, y, s.t).unwrap();
            let h = 1e-4;
            let d = |f: &dyn Fn(f64) -> f64| (f(-2.0 * h) - 8.0 * f(-h) + 8.0 * f(h) - f(2.0 * h)) / (12.0 * h);
            let grad = [d(&|e| v(s.x + e, s.y)), d(&|e| v(s.x, s.y + e))];
            let force = m.form().apply_inverse(grad);
            for k in 0..2 {
                worst = worst.max((a[k] + force[k]).abs());
            }
            count += 1;
        }
    }
    outcome(worst <= 1e-9 && count == 1000, format!("max |a - force| {worst:.2e} at {count} states"))
}

fn main() -> ExitCode {
    let mut extra = (0.0, 0.0);
    let results = [
        ("Ermakov invariant conservation", ermakov_conservation(&mut extra)),
        ("Noether invariant conservation", noether_conservation(extra)),
        ("Noether symmetry criterion", noether_criterion()),
        ("converse generator", converse_theorem()),
        ("involution", involution()),
        ("reduction to quadratures", quadratures()),
        ("linearisation", linearization()),
        ("representation equality", representation_equality()),
        ("Hamiltonian consistency", hamiltonian_consistency(extra.1)),
        ("equations of motion", eom_keystone()),
    ];
    let mut failed = 0;
    for (k, (name, r)) in results.iter().enumerate() {
        println!("{} [{}] {name}: {}", if r.pass { "PASS" } else { "FAIL" }, k + 1, r.detail);
        failed += usize::from(!r.pass);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
