//! Dormand–Prince 5(4) with PI step control and continuous output.

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dopri5Config {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; chosen automatically when `None`.
    pub h_init: Option<f64>,
    /// Upper bound on `|h|`; `0` means unbounded.
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for Dopri5Config {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            h_init: None,
            h_max: 0.0,
            max_steps: 1_000_000,
        }
    }
}

impl Dopri5Config {
    pub fn with_tolerances(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            ..Self::default()
        }
    }
}

/// An accepted step together with its interpolant.
#[derive(Debug, Clone)]
pub struct Step<const N: usize> {
    pub t0: f64,
    pub t1: f64,
    pub y0: [f64; N],
    pub y1: [f64; N],
    rcont: [[f64; N]; 4],
}

impl<const N: usize> Step<N> {
    /// Fifth-order interpolant, valid for `t` between `t0` and `t1`.
    pub fn eval(&self, t: f64) -> [f64; N] {
        let h = self.t1 - self.t0;
        let theta = (t - self.t0) / h;
        let theta1 = 1.0 - theta;
        let [r2, r3, r4, r5] = &self.rcont;
        core::array::from_fn(|i| {
            self.y0[i] + theta * (r2[i] + theta1 * (r3[i] + theta * (r4[i] + theta1 * r5[i])))
        })
    }

    pub fn contains(&self, t: f64) -> bool {
        let (lo, hi) = if self.t0 <= self.t1 { (self.t0, self.t1) } else { (self.t1, self.t0) };
        lo <= t && t <= hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
    pub stopped: bool,
}

fn axpy<const N: usize>(y: &[f64; N], terms: &[(f64, &[f64; N])]) -> [f64; N] {
    core::array::from_fn(|i| {
        let mut acc = y[i];
        for (c, k) in terms {
            acc += c * k[i];
        }
        acc
    })
}

fn error_norm<const N: usize>(err: &[f64; N], y0: &[f64; N], y1: &[f64; N], cfg: &Dopri5Config) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..N {
        let sc = cfg.atol + cfg.rtol * y0[i].abs().max(y1[i].abs());
        worst = worst.max((err[i] / sc).abs());
    }
    worst
}

fn initial_step<const N: usize, F>(
    rhs: &mut F,
    t0: f64,
    y0: &[f64; N],
    f0: &[f64; N],
    dir: f64,
    cfg: &Dopri5Config,
    span: f64,
) -> Result<f64>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let scale = |i: usize| cfg.atol + cfg.rtol * y0[i].abs();
    let mut dnf = 0.0;
    let mut dny = 0.0;
    for i in 0..N {
        dnf += (f0[i] / scale(i)).powi(2);
        dny += (y0[i] / scale(i)).powi(2);
    }
    let mut h = if dnf <= 1e-10 || dny <= 1e-10 { 1e-6 } else { (dny / dnf).sqrt() * 0.01 };
    h = h.min(span);
    if cfg.h_max > 0.0 {
        h = h.min(cfg.h_max);
    }
    let y1 = axpy(y0, &[(dir * h, f0)]);
    let f1 = rhs(t0 + dir * h, &y1)?;
    let mut der2 = 0.0;
    for i in 0..N {
        der2 += ((f1[i] - f0[i]) / scale(i)).powi(2);
    }
    let der2 = der2.sqrt() / h;
    let der12 = der2.max(dnf.sqrt());
    let h1 = if der12 <= 1e-15 {
        (h * 1e-3).max(1e-6)
    } else {
        (0.01 / der12).powf(0.2)
    };
    let mut h = (100.0 * h).min(h1).min(span);
    if cfg.h_max > 0.0 {
        h = h.min(cfg.h_max);
    }
    Ok(h)
}

/// Integrates `y' = rhs(t, y)` from `t0` to `t1` (either direction), handing
/// every accepted step to `observer`, which may stop the integration early.
pub fn integrate<const N: usize, F, O>(
    mut rhs: F,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    cfg: &Dopri5Config,
    mut observer: O,
) -> Result<Outcome<N>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
    O: FnMut(&Step<N>) -> Result<Control>,
{
    if !(t0.is_finite() && t1.is_finite()) || y0.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite integration input"));
    }
    let mut out = Outcome {
        t: t0,
        y: y0,
        accepted: 0,
        rejected: 0,
        evaluations: 0,
        stopped: false,
    };
    if t0 == t1 {
        return Ok(out);
    }
    let dir = if t1 > t0 { 1.0 } else { -1.0 };
    let span = (t1 - t0).abs();
    let mut t = t0;
    let mut y = y0;
    let mut k1 = rhs(t, &y)?;
    out.evaluations += 1;
    let mut h = match cfg.h_init {
        Some(h) if h > 0.0 => h,
        _ => {
            out.evaluations += 1;
            initial_step(&mut rhs, t0, &y0, &k1, dir, cfg, span)?
        }
    };
    let beta = 0.04;
    let expo1 = 0.2 - beta * 0.75;
    let safe = 0.9;
    let mut facold: f64 = 1e-4;
    let mut last_rejected = false;
    let mut steps = 0usize;
    loop {
        if cfg.h_max > 0.0 {
            h = h.min(cfg.h_max);
        }
        let remaining = (t1 - t).abs();
        let last = h >= remaining * (1.0 - 1e-12);
        if last {
            h = remaining;
        }
        if h < 1e-14 * t.abs().max(1.0) {
            return Err(Error::StepUnderflow { t, h: dir * h });
        }
        steps += 1;
        if steps > cfg.max_steps {
            return Err(Error::TooManySteps { t, steps: cfg.max_steps });
        }
        let hs = dir * h;
        let y2 = axpy(&y, &[(hs * A21, &k1)]);
        let k2 = rhs(t + C2 * hs, &y2)?;
        let y3 = axpy(&y, &[(hs * A31, &k1), (hs * A32, &k2)]);
        let k3 = rhs(t + C3 * hs, &y3)?;
        let y4 = axpy(&y, &[(hs * A41, &k1), (hs * A42, &k2), (hs * A43, &k3)]);
        let k4 = rhs(t + C4 * hs, &y4)?;
        let y5 = axpy(&y, &[(hs * A51, &k1), (hs * A52, &k2), (hs * A53, &k3), (hs * A54, &k4)]);
        let k5 = rhs(t + C5 * hs, &y5)?;
        let y6 = axpy(
            &y,
            &[(hs * A61, &k1), (hs * A62, &k2), (hs * A63, &k3), (hs * A64, &k4), (hs * A65, &k5)],
        );
        let t_new = if last { t1 } else { t + hs };
        let k6 = rhs(t_new, &y6)?;
        let y_new = axpy(
            &y,
            &[(hs * A71, &k1), (hs * A73, &k3), (hs * A74, &k4), (hs * A75, &k5), (hs * A76, &k6)],
        );
        let k7 = rhs(t_new, &y_new)?;
        out.evaluations += 6;
        let err_vec: [f64; N] = core::array::from_fn(|i| {
            hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
        });
        let err = error_norm(&err_vec, &y, &y_new, cfg);
        if !err.is_finite() {
            out.rejected += 1;
            last_rejected = true;
            h *= 0.1;
            continue;
        }
        let fac11 = err.powf(expo1);
        if err <= 1.0 {
            let mut fac = fac11 / facold.powf(beta);
            fac = (fac / safe).clamp(0.1, 5.0);
            let mut h_new = h / fac;
            if last_rejected {
                h_new = h_new.min(h);
            }
            facold = err.max(1e-4);
            let ydiff: [f64; N] = core::array::from_fn(|i| y_new[i] - y[i]);
            let bspl: [f64; N] = core::array::from_fn(|i| hs * k1[i] - ydiff[i]);
            let step = Step {
                t0: t,
                t1: t_new,
                y0: y,
                y1: y_new,
                rcont: [
                    ydiff,
                    bspl,
                    core::array::from_fn(|i| ydiff[i] - hs * k7[i] - bspl[i]),
                    core::array::from_fn(|i| {
                        hs * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i])
                    }),
                ],
            };
            out.accepted += 1;
            t = t_new;
            y = y_new;
            k1 = k7;
            out.t = t;
            out.y = y;
            if observer(&step)? == Control::Stop {
                out.stopped = true;
                return Ok(out);
            }
            if last {
                return Ok(out);
            }
            h = h_new;
            last_rejected = false;
        } else {
            out.rejected += 1;
            last_rejected = true;
            h /= (fac11 / safe).min(5.0);
        }
    }
}

/// Integrates and returns the states at the requested times, which must be
/// monotone in the direction of integration and lie within `[t0, t_end]`.
pub fn integrate_at<const N: usize, F>(
    rhs: F,
    t0: f64,
    y0: [f64; N],
    times: &[f64],
    cfg: &Dopri5Config,
) -> Result<alloc::vec::Vec<[f64; N]>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let mut samples = alloc::vec::Vec::with_capacity(times.len());
    let Some(&t_end) = times.last() else {
        return Ok(samples);
    };
    let mut next = 0;
    while next < times.len() && times[next] == t0 {
        samples.push(y0);
        next += 1;
    }
    integrate(rhs, t0, y0, t_end, cfg, |step| {
        while next < times.len() && step.contains(times[next]) {
            let t = times[next];
            samples.push(if t == step.t1 { step.y1 } else { step.eval(t) });
            next += 1;
        }
        Ok(Control::Continue)
    })?;
    if samples.len() != times.len() {
        return Err(Error::InvalidArgument("sample times outside the integration range"));
    }
    Ok(samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    fn harmonic(_t: f64, y: &[f64; 2]) -> Result<[f64; 2]> {
        Ok([y[1], -y[0]])
    }

    #[test]
    fn harmonic_end_point() {
        let cfg = Dopri5Config::with_tolerances(1e-12, 1e-14);
        let out = integrate(harmonic, 0.0, [1.0, 0.0], 10.0, &cfg, |_| Ok(Control::Continue)).unwrap();
        assert!((out.y[0] - 10f64.cos()).abs() < 1e-10);
        assert!((out.y[1] + 10f64.sin()).abs() < 1e-10);
        assert_eq!(out.t, 10.0);
    }

    #[test]
    fn backward_integration() {
        let cfg = Dopri5Config::with_tolerances(1e-12, 1e-14);
        let out = integrate(harmonic, 0.0, [1.0, 0.0], -4.0, &cfg, |_| Ok(Control::Continue)).unwrap();
        assert!((out.y[0] - 4f64.cos()).abs() < 1e-10);
        assert!((out.y[1] - 4f64.sin()).abs() < 1e-10);
    }

    #[test]
    fn dense_output_is_accurate() {
        let cfg = Dopri5Config::with_tolerances(1e-11, 1e-13);
        let mut worst: f64 = 0.0;
        integrate(|_, y: &[f64; 1]| Ok([y[0]]), 0.0, [1.0], 3.0, &cfg, |step| {
            for k in 1..10 {
                let t = step.t0 + (step.t1 - step.t0) * k as f64 / 10.0;
                worst = worst.max((step.eval(t)[0] - t.exp()).abs() / t.exp());
            }
            Ok(Control::Continue)
        })
        .unwrap();
        assert!(worst < 1e-9, "{worst}");
    }

    #[test]
    fn sampled_grid() {
        let times: Vec<f64> = (0..=50).map(|k| k as f64 * 0.2).collect();
        let cfg = Dopri5Config::with_tolerances(1e-12, 1e-14);
        let ys = integrate_at(harmonic, 0.0, [1.0, 0.0], &times, &cfg).unwrap();
        for (t, y) in times.iter().zip(&ys) {
            assert!((y[0] - t.cos()).abs() < 1e-9);
        }
    }

    #[test]
    fn observer_can_stop() {
        let cfg = Dopri5Config::default();
        let out = integrate(harmonic, 0.0, [1.0, 0.0], 100.0, &cfg, |step| {
            Ok(if step.y1[0] < 0.0 { Control::Stop } else { Control::Continue })
        })
        .unwrap();
        assert!(out.stopped && out.t < 3.0);
    }

    #[test]
    fn finite_time_blowup_underflows() {
        let cfg = Dopri5Config::default();
        let r = integrate(|_, y: &[f64; 1]| Ok([y[0] * y[0]]), 0.0, [1.0], 2.0, &cfg, |_| Ok(Control::Continue));
        assert!(matches!(r, Err(Error::StepUnderflow { .. }) | Err(Error::TooManySteps { .. })), "{r:?}");
    }

    #[test]
    fn rhs_errors_propagate() {
        let cfg = Dopri5Config::default();
        let r = integrate(
            |t, y: &[f64; 1]| if t > 0.5 { Err(Error::AlphaVanishes { t }) } else { Ok([y[0]]) },
            0.0,
            [1.0],
            1.0,
            &cfg,
            |_| Ok(Control::Continue),
        );
        assert!(matches!(r, Err(Error::AlphaVanishes { .. })));
    }
}
