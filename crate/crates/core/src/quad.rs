//! Adaptive 7/15-point Gauss–Kronrod quadrature.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Default cap on the number of panels held by the adaptive driver.
pub const MAX_PANELS: usize = 2000;

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    floor: f64,
}

/// Tolerance pair; the looser of the two wins.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub const fn new(abs: f64, rel: f64) -> Self {
        Self { abs, rel }
    }

    fn bound(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::new(1e-12, 1e-12)
    }
}

fn kronrod<F>(f: &mut F, a: f64, b: f64) -> Result<Panel>
where
    F: FnMut(f64) -> Result<f64>,
{
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let abs_half = half.abs();

    let fc = f(centre)?;
    let mut res_g = fc * WG[3];
    let mut res_k = fc * WGK[7];
    let mut res_abs = fc.abs() * WGK[7];
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];

    for j in 0..3 {
        let jtw = 2 * j + 1;
        let dx = half * XGK[jtw];
        let f1 = f(centre - dx)?;
        let f2 = f(centre + dx)?;
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        res_g += WG[j] * (f1 + f2);
        res_k += WGK[jtw] * (f1 + f2);
        res_abs += WGK[jtw] * (f1.abs() + f2.abs());
    }
    for j in 0..4 {
        let jtw = 2 * j;
        let dx = half * XGK[jtw];
        let f1 = f(centre - dx)?;
        let f2 = f(centre + dx)?;
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        res_k += WGK[jtw] * (f1 + f2);
        res_abs += WGK[jtw] * (f1.abs() + f2.abs());
    }

    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let value = res_k * half;
    res_abs *= abs_half;
    res_asc *= abs_half;
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * res_abs;
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(floor);
    }
    Ok(Panel {
        a,
        b,
        value,
        error,
        floor,
    })
}

/// Integrates `f` over `[a, b]` (either orientation) to the given tolerance.
pub fn integrate<F>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    integrate_with_limit(&mut f, a, b, tol, MAX_PANELS)
}

pub fn integrate_with_limit<F>(
    f: &mut F,
    a: f64,
    b: f64,
    tol: Tolerance,
    max_panels: usize,
) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if a == b {
        return Ok(0.0);
    }
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidArgument("quadrature limits must be finite"));
    }

    let mut panels: Vec<Panel> = Vec::with_capacity(16);
    panels.push(kronrod(f, a, b)?);

    loop {
        let total: f64 = panels.iter().map(|p| p.value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        let floor: f64 = panels.iter().map(|p| p.floor).sum();
        if error <= tol.bound(total) || error <= 2.0 * floor {
            return Ok(total);
        }

        // bisect the worst panel that still has room to be split
        let worst = panels
            .iter()
            .enumerate()
            .filter(|(_, p)| {
                let scale = p.a.abs().max(p.b.abs()).max(f64::MIN_POSITIVE);
                (p.b - p.a).abs() > 1e3 * f64::EPSILON * scale
            })
            .max_by(|(_, l), (_, r)| l.error.total_cmp(&r.error))
            .map(|(i, _)| i);

        let Some(index) = worst else {
            return Err(Error::QuadratureFailure { a, b, estimate: error });
        };
        if panels.len() >= max_panels {
            return Err(Error::QuadratureFailure { a, b, estimate: error });
        }
        let p = panels.swap_remove(index);
        let mid = 0.5 * (p.a + p.b);
        panels.push(kronrod(f, p.a, mid)?);
        panels.push(kronrod(f, mid, p.b)?);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let v = integrate(|x| Ok(x * x * x - 2.0 * x), -1.0, 3.0, Tolerance::default()).unwrap();
        // x^4/4 - x^2 from -1 to 3
        assert!((v - (81.0 / 4.0 - 9.0 - (0.25 - 1.0))).abs() < 1e-13);
    }

    #[test]
    fn sine_over_half_period() {
        let v = integrate(|x| Ok(x.sin()), 0.0, PI, Tolerance::default()).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let fwd = integrate(|x| Ok(x.exp()), 0.0, 1.0, Tolerance::default()).unwrap();
        let bwd = integrate(|x| Ok(x.exp()), 1.0, 0.0, Tolerance::default()).unwrap();
        assert!((fwd + bwd).abs() < 1e-14);
        assert!((fwd - (1f64.exp() - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn endpoint_singularity_is_resolved() {
        // 1/sqrt(x) on (0, 1]
        let v = integrate(|x| Ok(1.0 / x.sqrt()), 0.0, 1.0, Tolerance::new(1e-10, 1e-10)).unwrap();
        assert!((v - 2.0).abs() < 1e-9);
    }

    #[test]
    fn integrand_errors_propagate() {
        let r = integrate(
            |_| Err(Error::InvalidArgument("boom")),
            0.0,
            1.0,
            Tolerance::default(),
        );
        assert_eq!(r, Err(Error::InvalidArgument("boom")));
    }
}
