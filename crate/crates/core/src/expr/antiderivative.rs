use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use spin::RwLock;

use super::Expr;
use crate::error::Result;
use crate::quad::{self, Tolerance};

/// Growth factor of the memo grid: nodes sit at `λ₀ ± SCALE (GROWTH^k - 1)`.
const GROWTH: f64 = 1.2;
const SCALE: f64 = 0.5;
const SEGMENT_TOL: Tolerance = Tolerance::new(1e-14, 1e-14);

/// `F(u) = ∫_{λ₀}^{u} f(λ) dλ` for a one-variable integrand.
///
/// Cumulative integrals are cached at a geometrically spaced grid of nodes
/// on either side of `λ₀`, so a query costs one short quadrature once the
/// nodes up to `u` are known. The cache is behind a reader/writer lock and
/// the model holding it can be shared across threads.
#[derive(Debug)]
pub struct Antiderivative {
    integrand: Expr,
    lower: f64,
    zero: bool,
    // cumulative integral at node k on the upper / lower side; index 0 is λ₀
    above: RwLock<Vec<f64>>,
    below: RwLock<Vec<f64>>,
}

impl Clone for Antiderivative {
    fn clone(&self) -> Self {
        Self {
            integrand: self.integrand.clone(),
            lower: self.lower,
            zero: self.zero,
            above: RwLock::new(self.above.read().clone()),
            below: RwLock::new(self.below.read().clone()),
        }
    }
}

fn node_offset(k: usize) -> f64 {
    SCALE * (GROWTH.powi(k as i32) - 1.0)
}

impl Antiderivative {
    pub fn new(integrand: Expr, lower: f64) -> Self {
        let zero = integrand.is_identically_zero();
        Self {
            integrand,
            lower,
            zero,
            above: RwLock::new(alloc::vec![0.0]),
            below: RwLock::new(alloc::vec![0.0]),
        }
    }

    pub fn integrand(&self) -> &Expr {
        &self.integrand
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    /// True when the integrand constant-folds to zero.
    pub fn is_zero(&self) -> bool {
        self.zero
    }

    /// The integrand value, i.e. `F'(u)`.
    pub fn derivative(&self, u: f64) -> Result<f64> {
        if self.zero {
            return Ok(0.0);
        }
        Ok(self.integrand.eval(&[u])?)
    }

    fn integrate(&self, a: f64, b: f64) -> Result<f64> {
        quad::integrate(|x| Ok(self.integrand.eval(&[x])?), a, b, SEGMENT_TOL)
    }

    /// Cumulative integral up to the `k`-th node on one side.
    fn node_value(&self, k: usize, upward: bool) -> Result<f64> {
        let memo = if upward { &self.above } else { &self.below };
        {
            let known = memo.read();
            if let Some(v) = known.get(k) {
                return Ok(*v);
            }
        }
        let sign = if upward { 1.0 } else { -1.0 };
        let mut known = memo.write();
        while known.len() <= k {
            let j = known.len();
            let from = self.lower + sign * node_offset(j - 1);
            let to = self.lower + sign * node_offset(j);
            let piece = self.integrate(from, to)?;
            let prev = known[j - 1];
            known.push(prev + piece);
        }
        Ok(known[k])
    }

    /// `F(u)`; exactly zero at the reference limit.
    pub fn eval(&self, u: f64) -> Result<f64> {
        if self.zero {
            return Ok(0.0);
        }
        let d = u - self.lower;
        if d == 0.0 {
            return Ok(0.0);
        }
        let upward = d > 0.0;
        let sign = if upward { 1.0 } else { -1.0 };
        let mut k = ((1.0 + d.abs() / SCALE).ln() / GROWTH.ln()).floor() as usize;
        while k > 0 && node_offset(k) > d.abs() {
            k -= 1;
        }
        while node_offset(k + 1) <= d.abs() {
            k += 1;
        }
        let base = self.node_value(k, upward)?;
        let node = self.lower + sign * node_offset(k);
        Ok(base + self.integrate(node, u)?)
    }
}

/// One-shot `∫_{lower}^{u} f`.
pub fn antiderivative(f: &Expr, lower: f64, u: f64) -> Result<f64> {
    Antiderivative::new(f.clone(), lower).eval(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::{Error, ExprError};
    use crate::expr::parse_expr;
    use core::f64::consts::PI;

    fn expr(text: &str) -> Expr {
        parse_expr(text, &["lambda"]).unwrap()
    }

    #[test]
    fn closed_forms() {
        assert!((antiderivative(&expr("lambda"), 1.0, 2.0).unwrap() - 1.5).abs() < 1e-14);
        for u in [-3.0, 0.0, 0.5, 7.0, 1e6] {
            let v = antiderivative(&expr("1"), 1.0, u).unwrap();
            assert!((v - (u - 1.0)).abs() <= 1e-12 * (u - 1.0).abs().max(1.0), "{u}: {v}");
        }
        assert!((antiderivative(&expr("sin(lambda)"), 0.0, PI).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn reference_limit_is_exactly_zero() {
        let big_f = Antiderivative::new(expr("exp(lambda)"), 1.0);
        assert_eq!(big_f.eval(1.0).unwrap(), 0.0);
    }

    #[test]
    fn large_arguments_use_few_nodes() {
        let big_f = Antiderivative::new(expr("lambda"), 1.0);
        let u = 1e8;
        let v = big_f.eval(u).unwrap();
        let exact = 0.5 * (u * u - 1.0);
        assert!((v - exact).abs() <= 1e-12 * exact);
        assert!(big_f.above.read().len() < 120);
    }

    #[test]
    fn additive_over_intervals() {
        let f = expr("cos(lambda)*lambda^2");
        let a = 0.3;
        let b = 4.2;
        let from_ref = antiderivative(&f, 1.0, b).unwrap();
        let split = antiderivative(&f, 1.0, a).unwrap() + antiderivative(&f, a, b).unwrap();
        assert!((from_ref - split).abs() <= 2e-12 * from_ref.abs().max(1.0));
    }

    #[test]
    fn memo_matches_fresh_queries() {
        let f = expr("1/(1 + lambda^2)");
        let shared = Antiderivative::new(f.clone(), 1.0);
        for u in [5.0, -2.0, 30.0, 0.1, 5.0, 12.5] {
            let exact = u.atan() - 1f64.atan();
            assert!((shared.eval(u).unwrap() - exact).abs() < 1e-13, "{u}");
        }
    }

    #[test]
    fn domain_error_aborts() {
        let r = antiderivative(&expr("log(lambda)"), 1.0, -1.0);
        assert!(matches!(r, Err(Error::Expr(ExprError::Domain { .. }))));
    }
}
