//! Adaptive Gauss-Kronrod (7/15) quadrature.
//!
//! Densities supported on a ball of radius `R = ct` behave like powers of
//! `w = sqrt(R^2 - r^2)` at the boundary; [`integrate_radial`] maps
//! `r = R sin(phi)` so that `dr = w dphi` and those endpoint factors become
//! smooth in `phi`. Integrands there receive both `r` and `w`, with `w`
//! computed as `R cos(phi)` to avoid cancellation next to the boundary.

#[allow(unused_imports)] // needed when std is absent
use num_traits::Float;
use alloc::vec::Vec;


use crate::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadSettings {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadSettings {
    fn default() -> Self {
        Self {
            abs_tol: 1e-13,
            rel_tol: 1e-12,
            max_intervals: 2000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

/// One 15-point Kronrod panel on `[a, b]`; returns the Kronrod value and
/// `|K15 - G7|` as the error estimate.
pub fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let s = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

/// Globally adaptive integration of `f` over `[a, b]`: the panel with the
/// largest error estimate is bisected until the summed error estimate is below
/// `max(abs_tol, rel_tol * |I|)`.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    settings: &QuadSettings,
) -> Result<QuadResult> {
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
            intervals: 0,
        });
    }
    let (value, error) = gk15(&mut f, a, b);
    let mut panels = Vec::with_capacity(64);
    panels.push(Panel { a, b, value, error });
    loop {
        let total: f64 = panels.iter().map(|p| p.value).sum();
        let err: f64 = panels.iter().map(|p| p.error).sum();
        if !total.is_finite() || !err.is_finite() {
            return Err(Error::Quadrature { error: err });
        }
        if err <= settings.abs_tol.max(settings.rel_tol * total.abs()) {
            return Ok(QuadResult {
                value: total,
                error: err,
                intervals: panels.len(),
            });
        }
        if panels.len() >= settings.max_intervals {
            return Err(Error::Quadrature { error: err });
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        let (v1, e1) = gk15(&mut f, p.a, mid);
        let (v2, e2) = gk15(&mut f, mid, p.b);
        panels.push(Panel {
            a: p.a,
            b: mid,
            value: v1,
            error: e1,
        });
        panels.push(Panel {
            a: mid,
            b: p.b,
            value: v2,
            error: e2,
        });
    }
}

/// `int_0^R f(r, w) dr` with `w = sqrt(R^2 - r^2)`, evaluated through `r = R sin(phi)`.
pub fn integrate_radial<F: FnMut(f64, f64) -> f64>(
    mut f: F,
    radius: f64,
    settings: &QuadSettings,
) -> Result<QuadResult> {
    integrate_radial_between(&mut f, radius, 0.0, radius, settings)
}

/// Same as [`integrate_radial`] restricted to `r` in `[r0, r1]`.
pub fn integrate_radial_between<F: FnMut(f64, f64) -> f64>(
    f: &mut F,
    radius: f64,
    r0: f64,
    r1: f64,
    settings: &QuadSettings,
) -> Result<QuadResult> {
    let phi0 = (r0 / radius).clamp(0.0, 1.0).asin();
    let phi1 = (r1 / radius).clamp(0.0, 1.0).asin();
    integrate(
        |phi| {
            let (s, c) = phi.sin_cos();
            let w = radius * c;
            f(radius * s, w) * w
        },
        phi0,
        phi1,
        settings,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn polynomials_are_exact_on_one_panel() {
        let (v, e) = gk15(&mut |x: f64| x.powi(10) - 3.0 * x * x, -1.0, 2.0);
        let exact = (2f64.powi(11) + 1.0) / 11.0 - 9.0;
        assert!((v - exact).abs() < 1e-12);
        assert!(e < 1e-10);
    }

    #[test]
    fn adaptive_handles_sqrt_endpoint() {
        let r = integrate(|x: f64| x.sqrt(), 0.0, 1.0, &QuadSettings::default()).unwrap();
        assert!((r.value - 2.0 / 3.0).abs() < 1e-11);
    }

    #[test]
    fn radial_substitution_absorbs_inverse_sqrt() {
        // int_0^1 1/sqrt(1-r^2) dr = pi/2
        let r = integrate_radial(|_, w| 1.0 / w, 1.0, &QuadSettings::default()).unwrap();
        assert!((r.value - PI / 2.0).abs() < 1e-13);
        // int_0^2 r^2 dr over a part of the range
        let mut f = |r: f64, _w: f64| r * r;
        let q = integrate_radial_between(&mut f, 2.0, 0.5, 1.5, &QuadSettings::default()).unwrap();
        assert!((q.value - (1.5f64.powi(3) - 0.125) / 3.0).abs() < 1e-12);
    }
}
