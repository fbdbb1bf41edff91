//! Special-function kernel: log-Gamma with sign, reciprocal Gamma, the
//! two-parameter and multi-index Mittag-Leffler functions, and the modified
//! Bessel functions `I_0`, `I_1`.
//!
//! Every series is summed in increasing order with compensated accumulation and
//! the coefficient Gamma ratios are formed in log space, so indices well past
//! the overflow point of `Gamma` are harmless.

#[allow(unused_imports)] // needed when std is absent
use num_traits::Float;

use crate::series::{sum_log_series, sum_series, SeriesControl, SignedLn};
use crate::{Error, Result};

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// `(ln|Gamma(x)|, sign(Gamma(x)))`.
pub fn gamma_ln(x: f64) -> Result<(f64, f64)> {
    if !x.is_finite() {
        return Err(Error::Domain {
            what: "gamma_ln needs a finite argument",
            value: x,
        });
    }
    if is_nonpositive_integer(x) {
        return Err(Error::GammaPole(x));
    }
    let (lg, sign) = libm::lgamma_r(x);
    Ok((lg, if sign < 0 { -1.0 } else { 1.0 }))
}

/// `Gamma(x)` as a signed log magnitude. Poles are reported as errors.
pub fn gamma_signed(x: f64) -> Result<SignedLn> {
    let (lg, s) = gamma_ln(x)?;
    Ok(SignedLn::new(lg, s as i8))
}

/// `1/Gamma(x)` as a signed log magnitude; exactly zero at the poles.
pub fn recip_gamma_signed(x: f64) -> SignedLn {
    match gamma_ln(x) {
        Ok((lg, s)) => SignedLn::new(-lg, s as i8),
        Err(_) => SignedLn::ZERO,
    }
}

/// `1/Gamma(x)`, defined as exactly `0` at `x = 0, -1, -2, ...`.
pub fn reciprocal_gamma(x: f64) -> f64 {
    if is_nonpositive_integer(x) {
        return 0.0;
    }
    if x.abs() < 170.0 {
        1.0 / libm::tgamma(x)
    } else {
        recip_gamma_signed(x).to_f64()
    }
}

fn check_ml_params(alpha: f64, beta: f64, x: f64) -> Result<()> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter("Mittag-Leffler alpha must be positive"));
    }
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::InvalidParameter("Mittag-Leffler beta must be positive"));
    }
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain {
            what: "Mittag-Leffler argument must be finite and non-negative",
            value: x,
        });
    }
    Ok(())
}

/// `ln E_{alpha,beta}(x)` for `x >= 0`; stays finite where `E` itself overflows.
pub fn ln_mittag_leffler(alpha: f64, beta: f64, x: f64, ctl: &SeriesControl) -> Result<f64> {
    check_ml_params(alpha, beta, x)?;
    if x == 0.0 {
        return Ok(-gamma_ln(beta)?.0);
    }
    let ln_x = x.ln();
    let sum = sum_log_series(ctl, 0, |k| {
        let kf = k as f64;
        Ok(SignedLn::new(kf * ln_x, 1) * recip_gamma_signed(alpha * kf + beta))
    })?;
    Ok(sum.signed_ln().ln_abs)
}

/// Two-parameter Mittag-Leffler function `E_{alpha,beta}(x) = sum_k x^k / Gamma(alpha k + beta)`.
pub fn mittag_leffler(alpha: f64, beta: f64, x: f64, ctl: &SeriesControl) -> Result<f64> {
    check_ml_params(alpha, beta, x)?;
    if x == 0.0 {
        return Ok(reciprocal_gamma(beta));
    }
    let ln_x = x.ln();
    let sum = sum_log_series(ctl, 0, |k| {
        let kf = k as f64;
        Ok(SignedLn::new(kf * ln_x, 1) * recip_gamma_signed(alpha * kf + beta))
    })?;
    let v = sum.value();
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Overflow)
    }
}

/// Multi-index Mittag-Leffler function
/// `E_{a1,b1,a2,b2}(x) = sum_k x^k / (Gamma(a1 k + b1) Gamma(a2 k + b2))`.
pub fn multi_index_ml(
    a1: f64,
    b1: f64,
    a2: f64,
    b2: f64,
    x: f64,
    ctl: &SeriesControl,
) -> Result<f64> {
    if !(a1 > 0.0) || !(a2 > 0.0) || !a1.is_finite() || !a2.is_finite() {
        return Err(Error::InvalidParameter("multi-index Mittag-Leffler needs a1, a2 > 0"));
    }
    if !b1.is_finite() || !b2.is_finite() {
        return Err(Error::InvalidParameter("multi-index Mittag-Leffler needs finite b1, b2"));
    }
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain {
            what: "multi-index Mittag-Leffler argument must be finite and non-negative",
            value: x,
        });
    }
    if x == 0.0 {
        return Ok(reciprocal_gamma(b1) * reciprocal_gamma(b2));
    }
    let ln_x = x.ln();
    // Leading terms can vanish when a `b` sits on a pole; skip them so the
    // stopping rule does not fire on an empty sum.
    let first = (0..ctl.max_terms)
        .find(|&k| {
            let kf = k as f64;
            !is_nonpositive_integer(a1 * kf + b1) && !is_nonpositive_integer(a2 * kf + b2)
        })
        .ok_or(Error::NonConvergence {
            max_terms: ctl.max_terms,
        })?;
    let sum = sum_log_series(ctl, first, |k| {
        let kf = k as f64;
        Ok(SignedLn::new(kf * ln_x, 1)
            * recip_gamma_signed(a1 * kf + b1)
            * recip_gamma_signed(a2 * kf + b2))
    })?;
    Ok(sum.value())
}

/// Modified Bessel function of the first kind, order 0 or 1, by its power series.
pub fn bessel_i(nu: u32, x: f64, ctl: &SeriesControl) -> Result<f64> {
    if nu > 1 {
        return Err(Error::InvalidParameter("bessel_i supports orders 0 and 1 only"));
    }
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain {
            what: "bessel_i argument must be finite and non-negative",
            value: x,
        });
    }
    if x == 0.0 {
        return Ok(if nu == 0 { 1.0 } else { 0.0 });
    }
    let q = 0.25 * x * x;
    let nuf = f64::from(nu);
    let mut term = if nu == 0 { 1.0 } else { 0.5 * x };
    sum_series(ctl, 0, |k| {
        let t = term;
        let kf = k as f64;
        term *= q / ((kf + 1.0) * (kf + 1.0 + nuf));
        t
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::{E, PI};

    fn ctl() -> SeriesControl {
        SeriesControl::default()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn gamma_ln_examples() {
        let (lg, s) = gamma_ln(1.0).unwrap();
        assert!(lg.abs() < 1e-15 && s == 1.0);
        let (lg, s) = gamma_ln(0.5).unwrap();
        assert!((lg - PI.sqrt().ln()).abs() < 1e-15 && s == 1.0);
        // Reflection: Gamma(-1/2) = pi / (sin(-pi/2) Gamma(3/2)) = -2 sqrt(pi).
        let (lg, s) = gamma_ln(-0.5).unwrap();
        assert!((lg - (2.0 * PI.sqrt()).ln()).abs() < 1e-14 && s == -1.0);
        assert_eq!(gamma_ln(0.0), Err(Error::GammaPole(0.0)));
        assert_eq!(gamma_ln(-3.0), Err(Error::GammaPole(-3.0)));
    }

    #[test]
    fn gamma_ln_accuracy_over_range() {
        // Recurrence ln Gamma(x+1) = ln Gamma(x) + ln|x| checks consistency on [-30, 300].
        let mut x = -29.75;
        while x < 299.0 {
            let (a, sa) = gamma_ln(x).unwrap();
            let (b, sb) = gamma_ln(x + 1.0).unwrap();
            assert!((b - a - x.abs().ln()).abs() <= 1e-12 * b.abs().max(1.0), "x={x}");
            assert_eq!(sb, sa * x.signum());
            x += 0.37;
        }
        // Stirling-free anchors: ln(100!) and Gamma(-29.5) by reflection.
        let ln_100_fact: f64 = (1..=100).map(|i| (i as f64).ln()).sum();
        assert!(rel(gamma_ln(101.0).unwrap().0, ln_100_fact) < 1e-13);
    }

    #[test]
    fn reciprocal_gamma_examples() {
        assert_eq!(reciprocal_gamma(0.0), 0.0);
        assert_eq!(reciprocal_gamma(1.0 - 4.0 / 2.0), 0.0);
        assert!(rel(reciprocal_gamma(-0.5), -1.0 / (2.0 * PI.sqrt())) < 1e-14);
        for n in 0..=10 {
            assert_eq!(reciprocal_gamma(-(n as f64)), 0.0);
        }
        for &x in &[0.5, 1.5, 2.0, 3.25] {
            assert!((reciprocal_gamma(x) * libm::tgamma(x) - 1.0).abs() < 1e-12);
        }
        assert!(reciprocal_gamma(160.0) > 0.0);
        assert_eq!(reciprocal_gamma(200.0), 0.0);
    }

    #[test]
    fn mittag_leffler_identities() {
        assert!(rel(mittag_leffler(1.0, 1.0, 1.0, &ctl()).unwrap(), E) < 1e-14);
        assert!(rel(mittag_leffler(0.7, 2.5, 0.0, &ctl()).unwrap(), reciprocal_gamma(2.5)) < 1e-15);
        assert!(rel(mittag_leffler(2.0, 2.0, 1.0, &ctl()).unwrap(), libm::sinh(1.0)) < 1e-14);
        for i in 0..=100 {
            let x = 0.1 * i as f64;
            assert!(rel(mittag_leffler(1.0, 1.0, x, &ctl()).unwrap(), x.exp()) < 1e-10);
        }
        // E_{1,2}(x) = (e^x - 1)/x
        assert!(rel(mittag_leffler(1.0, 2.0, 2.0, &ctl()).unwrap(), (E * E - 1.0) / 2.0) < 1e-14);
        assert!(mittag_leffler(0.0, 1.0, 1.0, &ctl()).is_err());
        assert!(mittag_leffler(1.0, 1.0, -1.0, &ctl()).is_err());
    }

    #[test]
    fn ln_mittag_leffler_survives_overflow() {
        let wide = SeriesControl::new(1e-14, 4000).unwrap();
        let v = ln_mittag_leffler(1.0, 1.0, 800.0, &wide).unwrap();
        assert!(rel(v, 800.0) < 1e-13);
    }

    #[test]
    fn multi_index_examples() {
        let v = multi_index_ml(0.5, 0.5, 0.5, 1.5, 0.0, &ctl()).unwrap();
        assert!(rel(v, 2.0 / PI) < 1e-14);
        // Direct series with Gamma((k+1)/2) Gamma((k+3)/2) at x = 1.
        let direct: f64 = (0..80)
            .map(|k| {
                let kf = k as f64;
                1.0 / (libm::tgamma((kf + 1.0) / 2.0) * libm::tgamma((kf + 3.0) / 2.0))
            })
            .sum();
        let v = multi_index_ml(0.5, 0.5, 0.5, 1.5, 1.0, &ctl()).unwrap();
        assert!(rel(v, direct) < 1e-13);
        // Normalizer of the second count law at d = 3: E_{1/2,3/2,1/2,1}(lt/2) = 2 (e^{lt}-1) / (sqrt(pi) lt).
        let v = multi_index_ml(0.5, 1.5, 0.5, 1.0, 0.5, &ctl()).unwrap();
        assert!(rel(v, 2.0 * (E - 1.0) / PI.sqrt()) < 1e-13);
        assert!(multi_index_ml(0.0, 1.0, 1.0, 1.0, 1.0, &ctl()).is_err());
    }

    #[test]
    fn multi_index_with_pole_in_leading_term() {
        // b1 = 0 kills k = 0; the remaining series is sum_{k>=1} x^k / (Gamma(k) Gamma(k+1)).
        let x: f64 = 0.8;
        let direct: f64 = (1..60)
            .map(|k| x.powi(k) / (libm::tgamma(k as f64) * libm::tgamma(k as f64 + 1.0)))
            .sum();
        let v = multi_index_ml(1.0, 0.0, 1.0, 1.0, x, &ctl()).unwrap();
        assert!(rel(v, direct) < 1e-14);
    }

    #[test]
    fn bessel_examples() {
        assert_eq!(bessel_i(0, 0.0, &ctl()).unwrap(), 1.0);
        assert_eq!(bessel_i(1, 0.0, &ctl()).unwrap(), 0.0);
        // 30-term series summed independently in double-double style (pairwise products).
        let mut oracle = 0.0;
        let mut fact_k = 1.0;
        for k in 0..30 {
            if k > 0 {
                fact_k *= k as f64;
            }
            oracle += 1.0 / (fact_k * fact_k * (k as f64 + 1.0));
        }
        assert!(rel(bessel_i(1, 2.0, &ctl()).unwrap(), oracle) < 1e-14);
        assert!(rel(bessel_i(1, 2.0, &ctl()).unwrap(), 1.590_636_854_637_329) < 1e-13);
        assert!(rel(bessel_i(0, 1.0, &ctl()).unwrap(), 1.266_065_877_752_008_4) < 1e-14);
        let x = 1e-6;
        assert!(rel(bessel_i(1, x, &ctl()).unwrap() / x, 0.5) < 1e-6);
        assert!(bessel_i(2, 1.0, &ctl()).is_err());
    }
}
