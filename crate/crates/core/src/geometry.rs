//! Quadratic-form radius, polar angle and the Cartesian/polar state maps.
//!
//! `R² = A x² + 2B xy + C y²` and `θ = atan2(y, x)`. The Euclidean radius is
//! `r = R ψ(θ)` with `ψ²(θ) = 1 / (A cos²θ + 2B sinθ cosθ + C sin²θ)`.

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Smallest admissible `|AC - B²|`.
pub const KAPPA_EPS: f64 = 1e-12;
const DIRECTION_EPS: f64 = 1e-14;

/// Constant symmetric form `[[A, B], [B, C]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticForm {
    a: f64,
    b: f64,
    c: f64,
}

impl QuadraticForm {
    /// Rejects non-finite coefficients and `|AC - B²| < 1e-12`.
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && c.is_finite()) {
            return Err(Error::InvalidArgument("form coefficients must be finite"));
        }
        let form = Self { a, b, c };
        if form.kappa().abs() < KAPPA_EPS {
            return Err(Error::InvalidArgument("kappa = AC - B^2 must be nonzero"));
        }
        Ok(form)
    }

    /// Builds a form without the `κ ≠ 0` check.
    pub const fn unchecked(a: f64, b: f64, c: f64) -> Self {
        Self { a, b, c }
    }

    pub const IDENTITY: QuadraticForm = QuadraticForm::unchecked(1.0, 0.0, 1.0);

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// `κ = AC - B²`.
    pub fn kappa(&self) -> f64 {
        self.a * self.c - self.b * self.b
    }

    pub fn is_positive_definite(&self) -> bool {
        self.a > 0.0 && self.kappa() > 0.0
    }

    /// `M v` for the metric `M = [[A, B], [B, C]]`.
    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [self.a * v[0] + self.b * v[1], self.b * v[0] + self.c * v[1]]
    }

    /// `M⁻¹ v = [[C, -B], [-B, A]] v / κ`.
    pub fn apply_inverse(&self, v: [f64; 2]) -> [f64; 2] {
        let k = self.kappa();
        [(self.c * v[0] - self.b * v[1]) / k, (self.a * v[1] - self.b * v[0]) / k]
    }

    /// `uᵀ M v`.
    pub fn inner(&self, u: [f64; 2], v: [f64; 2]) -> f64 {
        let mv = self.apply(v);
        u[0] * mv[0] + u[1] * mv[1]
    }

    /// `R² = A x² + 2B xy + C y²`; may be non-positive for indefinite forms.
    pub fn r_sq(&self, x: f64, y: f64) -> f64 {
        self.a * x * x + 2.0 * self.b * x * y + self.c * y * y
    }

    /// `1/ψ²(θ) = A cos²θ + 2B sinθ cosθ + C sin²θ`.
    pub fn direction(&self, theta: f64) -> f64 {
        let (s, c) = theta.sin_cos();
        self.a * c * c + 2.0 * self.b * s * c + self.c * s * s
    }

    /// `d/dθ (1/ψ²) = (C - A) sin 2θ + 2B cos 2θ`.
    pub fn direction_derivative(&self, theta: f64) -> f64 {
        let (s2, c2) = (2.0 * theta).sin_cos();
        (self.c - self.a) * s2 + 2.0 * self.b * c2
    }

    /// `ψ²(θ)`.
    pub fn psi_sq(&self, theta: f64) -> Result<f64> {
        let d = self.direction(theta);
        if d.abs() < DIRECTION_EPS {
            return Err(Error::DegenerateDirection { theta });
        }
        Ok(1.0 / d)
    }

    pub fn to_polar(&self, s: &CartesianState) -> Result<PolarState> {
        let r2_euclid = s.x * s.x + s.y * s.y;
        let theta = s.y.atan2(s.x);
        let big_r2 = self.r_sq(s.x, s.y);
        if r2_euclid == 0.0 || big_r2 <= 0.0 {
            return Err(Error::DegenerateDirection { theta });
        }
        let r = big_r2.sqrt();
        let r_dot = self.inner([s.x, s.y], [s.x_dot, s.y_dot]) / r;
        let theta_dot = (s.x * s.y_dot - s.y * s.x_dot) / r2_euclid;
        Ok(PolarState {
            r,
            theta,
            r_dot,
            theta_dot,
            t: s.t,
        })
    }

    pub fn from_polar(&self, p: &PolarState) -> Result<CartesianState> {
        let d = self.direction(p.theta);
        if d <= DIRECTION_EPS {
            return Err(Error::DegenerateDirection { theta: p.theta });
        }
        let psi = d.sqrt().recip();
        // dψ/dθ = -½ D^{-3/2} D'
        let dpsi = -0.5 * psi / d * self.direction_derivative(p.theta);
        let (s, c) = p.theta.sin_cos();
        let rho = p.r * psi;
        let rho_dot = p.r_dot * psi + p.r * dpsi * p.theta_dot;
        Ok(CartesianState {
            x: rho * c,
            y: rho * s,
            x_dot: rho_dot * c - rho * s * p.theta_dot,
            y_dot: rho_dot * s + rho * c * p.theta_dot,
            t: p.t,
        })
    }
}

/// `κ` of a form (free-function spelling).
pub fn kappa(form: &QuadraticForm) -> f64 {
    form.kappa()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartesianState {
    pub x: f64,
    pub y: f64,
    pub x_dot: f64,
    pub y_dot: f64,
    pub t: f64,
}

impl CartesianState {
    pub const fn new(x: f64, y: f64, x_dot: f64, y_dot: f64, t: f64) -> Self {
        Self {
            x,
            y,
            x_dot,
            y_dot,
            t,
        }
    }

    pub fn position(&self) -> [f64; 2] {
        [self.x, self.y]
    }

    pub fn velocity(&self) -> [f64; 2] {
        [self.x_dot, self.y_dot]
    }

    /// `x ẏ - y ẋ`.
    pub fn angular_momentum(&self) -> f64 {
        self.x * self.y_dot - self.y * self.x_dot
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite()
            && self.y.is_finite()
            && self.x_dot.is_finite()
            && self.y_dot.is_finite()
            && self.t.is_finite()
    }
}

/// `(R, θ, Ṙ, θ̇)` at time `t`, with `R` the form radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarState {
    pub r: f64,
    pub theta: f64,
    pub r_dot: f64,
    pub theta_dot: f64,
    pub t: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn kappa_examples() {
        assert_eq!(QuadraticForm::IDENTITY.kappa(), 1.0);
        assert_eq!(QuadraticForm::unchecked(0.0, 1.0, 0.0).kappa(), -1.0);
        assert_eq!(QuadraticForm::unchecked(2.0, 1.0, 1.0).kappa(), 1.0);
        assert!(QuadraticForm::new(1.0, 1.0, 1.0).is_err());
        assert!(QuadraticForm::new(f64::NAN, 0.0, 1.0).is_err());
    }

    #[test]
    fn psi_sq_examples() {
        for theta in [0.0, 0.3, 2.0, -1.0] {
            assert!(close(QuadraticForm::IDENTITY.psi_sq(theta).unwrap(), 1.0, 1e-15));
        }
        let form = QuadraticForm::unchecked(4.0, 1.0, 1.0);
        assert_eq!(form.psi_sq(0.0).unwrap(), 0.25);
        assert!(close(form.psi_sq(FRAC_PI_2).unwrap(), 1.0, 1e-15));
        // indefinite form along its null ray
        let goedert = QuadraticForm::unchecked(0.0, 1.0, 0.0);
        assert!(matches!(goedert.psi_sq(0.0), Err(Error::DegenerateDirection { .. })));
    }

    #[test]
    fn to_polar_examples() {
        let p = QuadraticForm::IDENTITY
            .to_polar(&CartesianState::new(1.0, 0.0, 0.0, 1.0, 0.0))
            .unwrap();
        assert_eq!((p.r, p.theta, p.r_dot, p.theta_dot), (1.0, 0.0, 0.0, 1.0));

        let p = QuadraticForm::IDENTITY
            .to_polar(&CartesianState::new(1.0, 1.0, 0.0, 0.0, 0.0))
            .unwrap();
        assert!(close(p.r, 2f64.sqrt(), 1e-15));
        assert!(close(p.theta, FRAC_PI_4, 1e-15));
        assert_eq!((p.r_dot, p.theta_dot), (0.0, 0.0));
    }

    #[test]
    fn to_polar_skewed_form_against_finite_differences() {
        let form = QuadraticForm::unchecked(2.0, 0.5, 1.0);
        let s = CartesianState::new(1.0, 1.0, 0.3, -0.1, 0.0);
        let p = form.to_polar(&s).unwrap();
        assert!(close(p.r, 2.0, 1e-15));
        assert!(close(p.r_dot, 0.3, 1e-15));
        assert!(close(p.theta_dot, -0.2, 1e-15));

        // straight-line motion q(t) = q + t v
        let h = 1e-5;
        let at = |t: f64| (form.r_sq(1.0 + 0.3 * t, 1.0 - 0.1 * t).sqrt(), (1.0 - 0.1 * t).atan2(1.0 + 0.3 * t));
        let (rp, tp) = at(h);
        let (rm, tm) = at(-h);
        assert!((p.r_dot - (rp - rm) / (2.0 * h)).abs() < 1e-9);
        assert!((p.theta_dot - (tp - tm) / (2.0 * h)).abs() < 1e-9);
    }

    #[test]
    fn from_polar_examples() {
        let s = QuadraticForm::IDENTITY
            .from_polar(&PolarState {
                r: 1.0,
                theta: 0.0,
                r_dot: 0.0,
                theta_dot: 1.0,
                t: 0.0,
            })
            .unwrap();
        assert_eq!((s.x, s.y, s.x_dot, s.y_dot), (1.0, 0.0, 0.0, 1.0));

        let form = QuadraticForm::unchecked(2.0, 0.5, 1.0);
        let psi_sq = form.psi_sq(FRAC_PI_4).unwrap();
        assert!(close(psi_sq, 0.5, 1e-15));
        let s = form
            .from_polar(&PolarState {
                r: 2.0,
                theta: FRAC_PI_4,
                r_dot: 0.0,
                theta_dot: 0.0,
                t: 0.0,
            })
            .unwrap();
        let expected = 2f64.sqrt() * psi_sq.sqrt();
        assert!(close(s.x, expected, 1e-15) && close(s.y, expected, 1e-15));
        let back = form.to_polar(&s).unwrap();
        assert!(close(back.r, 2.0, 1e-14) && close(back.theta, FRAC_PI_4, 1e-14));
    }

    #[test]
    fn degenerate_points() {
        let goedert = QuadraticForm::unchecked(0.0, 1.0, 0.0);
        assert!(goedert.to_polar(&CartesianState::new(1.0, -1.0, 0.0, 0.0, 0.0)).is_err());
        assert!(QuadraticForm::IDENTITY
            .to_polar(&CartesianState::new(0.0, 0.0, 1.0, 0.0, 0.0))
            .is_err());
        assert!(goedert
            .from_polar(&PolarState {
                r: 1.0,
                theta: -FRAC_PI_4,
                r_dot: 0.0,
                theta_dot: 0.0,
                t: 0.0
            })
            .is_err());
    }

    fn definite_form() -> impl Strategy<Value = QuadraticForm> {
        (0.2f64..4.0, -1.0f64..1.0, 0.2f64..4.0).prop_filter_map("definite", |(a, b, c)| {
            let form = QuadraticForm::unchecked(a, b, c);
            (form.kappa() > 0.05).then_some(form)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn polar_round_trips(
            form in definite_form(),
            r in 0.05f64..20.0,
            theta in -PI..PI,
            r_dot in -5.0f64..5.0,
            theta_dot in -5.0f64..5.0,
        ) {
            let p = PolarState { r, theta, r_dot, theta_dot, t: 0.0 };
            let s = form.from_polar(&p).unwrap();
            let q = form.to_polar(&s).unwrap();
            prop_assert!(close(q.r, p.r, 1e-12));
            prop_assert!((q.theta - p.theta).abs() <= 1e-12 * PI);
            prop_assert!(close(q.r_dot, p.r_dot, 1e-12));
            prop_assert!(close(q.theta_dot, p.theta_dot, 1e-12));

            let s2 = form.from_polar(&q).unwrap();
            let scale = s.x.abs().max(s.y.abs());
            prop_assert!((s2.x - s.x).abs() <= 1e-12 * scale);
            prop_assert!((s2.y - s.y).abs() <= 1e-12 * scale);
            let vscale = s.x_dot.abs().max(s.y_dot.abs()).max(1.0);
            prop_assert!((s2.x_dot - s.x_dot).abs() <= 1e-12 * vscale);
            prop_assert!((s2.y_dot - s.y_dot).abs() <= 1e-12 * vscale);
        }

        #[test]
        fn form_radius_matches_euclidean_over_psi(
            form in definite_form(),
            x in -10.0f64..10.0,
            y in -10.0f64..10.0,
        ) {
            prop_assume!(x * x + y * y > 1e-6);
            let psi_sq = form.psi_sq(y.atan2(x)).unwrap();
            let via_psi = (x * x + y * y) / psi_sq;
            prop_assert!(close(form.r_sq(x, y), via_psi, 1e-12));
        }
    }
}
