//! Count laws for the number of direction changes.
//!
//! Both families, and the homogeneous Poisson law, share the shape
//!
//! ```text
//! P{N = k} = x^k / (Gamma(alpha k + beta) E_{alpha,beta}(x)),   k = 0, 1, ...
//! ```
//!
//! | family               | x              | alpha   | beta    |
//! |----------------------|----------------|---------|---------|
//! | `First` (d >= 2)     | `(lt)^(d-1)`   | `d - 1` | `d - 1` |
//! | `Second` (d >= 3)    | `(lt)^(d-2)`   | `d - 2` | `d - 1` |
//! | `HomogeneousPoisson` | `lt`           | `1`     | `1`     |
//!
//! `First` at `d = 2` is the Poisson law itself.

#[allow(unused_imports)] // needed when std is absent
use num_traits::Float;
use alloc::vec::Vec;

use rand::Rng;

use crate::series::{sum_series, SeriesControl};
use crate::specfun::{gamma_ln, ln_mittag_leffler, multi_index_ml, recip_gamma_signed};
use crate::{Error, Result, SignedLn};

const CDF_TARGET: f64 = 1.0 - 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum CountFamily {
    First,
    Second,
    HomogeneousPoisson,
}

/// Checks the dimension constraint of a family and returns its `(alpha, beta)`.
pub(crate) fn family_indices(family: CountFamily, d: u32) -> Result<(f64, f64)> {
    let df = f64::from(d);
    match family {
        CountFamily::First if d >= 2 => Ok((df - 1.0, df - 1.0)),
        CountFamily::First => Err(Error::InvalidModel("First family requires dim ≥ 2")),
        CountFamily::Second if d >= 3 => Ok((df - 2.0, df - 1.0)),
        CountFamily::Second => Err(Error::InvalidModel("Second family requires dim ≥ 3")),
        CountFamily::HomogeneousPoisson => Ok((1.0, 1.0)),
    }
}

fn check_rate_time(lambda: f64, t: f64) -> Result<()> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidParameter("rate lambda must be positive and finite"));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter("time t must be positive and finite"));
    }
    Ok(())
}

/// A generalized Poisson count law with its cumulative table cached for
/// inverse-CDF sampling. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct CountDistribution {
    family: CountFamily,
    d: u32,
    lambda: f64,
    t: f64,
    ln_x: f64,
    alpha: f64,
    beta: f64,
    ln_norm: f64,
    cdf: Vec<f64>,
}

impl CountDistribution {
    pub fn new(family: CountFamily, d: u32, lambda: f64, t: f64, ctl: &SeriesControl) -> Result<Self> {
        check_rate_time(lambda, t)?;
        let (alpha, beta) = family_indices(family, d)?;
        let ln_x = alpha * (lambda * t).ln();
        let x = ln_x.exp();
        let ln_norm = ln_mittag_leffler(alpha, beta, x, ctl)?;
        let mut dist = Self {
            family,
            d,
            lambda,
            t,
            ln_x,
            alpha,
            beta,
            ln_norm,
            cdf: Vec::new(),
        };
        let mut cum = 0.0;
        for k in 0..ctl.max_terms {
            cum += dist.pmf(k);
            dist.cdf.push(cum);
            if cum >= CDF_TARGET {
                return Ok(dist);
            }
        }
        Err(Error::Truncation {
            max_terms: ctl.max_terms,
        })
    }

    pub fn first(d: u32, lambda: f64, t: f64, ctl: &SeriesControl) -> Result<Self> {
        Self::new(CountFamily::First, d, lambda, t, ctl)
    }

    pub fn second(d: u32, lambda: f64, t: f64, ctl: &SeriesControl) -> Result<Self> {
        Self::new(CountFamily::Second, d, lambda, t, ctl)
    }

    pub fn poisson(lambda: f64, t: f64, ctl: &SeriesControl) -> Result<Self> {
        Self::new(CountFamily::HomogeneousPoisson, 1, lambda, t, ctl)
    }

    pub fn family(&self) -> CountFamily {
        self.family
    }

    pub fn dim(&self) -> u32 {
        self.d
    }

    pub fn lambda_t(&self) -> f64 {
        self.lambda * self.t
    }

    /// `ln P{N = k}`.
    pub fn ln_pmf(&self, k: usize) -> f64 {
        let kf = k as f64;
        let ln_xk = if k == 0 { 0.0 } else { kf * self.ln_x };
        let r = recip_gamma_signed(self.alpha * kf + self.beta);
        if r.is_zero() || ln_xk == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        ln_xk + r.ln_abs - self.ln_norm
    }

    pub fn pmf(&self, k: usize) -> f64 {
        self.ln_pmf(k).exp()
    }

    /// Cumulative probabilities `P{N <= k}` for `k = 0..len`, ending at or above `1 - 1e-12`.
    pub fn cdf_table(&self) -> &[f64] {
        &self.cdf
    }

    pub fn support_len(&self) -> usize {
        self.cdf.len()
    }

    /// Inverse-CDF draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let k = self.cdf.partition_point(|&c| c <= u);
        k.min(self.cdf.len() - 1)
    }

    pub fn mean(&self) -> f64 {
        (0..self.cdf.len()).map(|k| k as f64 * self.pmf(k)).sum()
    }
}

/// The count pmf in its duplication-formula form, normalized by a multi-index
/// Mittag-Leffler function at `(lt/2)^alpha`:
///
/// * `First`:  `(lt/2)^{k(d-1)} / (Gamma((k+1)(d-1)/2 + 1/2) Gamma((k+1)(d-1)/2) E_{(d-1)/2, d/2, (d-1)/2, (d-1)/2})`
/// * `Second`: `(lt/2)^{k(d-2)} / (Gamma((d/2-1)k + d/2) Gamma((d/2-1)k + (d-1)/2) E_{d/2-1, d/2, d/2-1, (d-1)/2})`
pub fn pmf_multi_index_form(
    family: CountFamily,
    d: u32,
    lambda: f64,
    t: f64,
    k: usize,
    ctl: &SeriesControl,
) -> Result<f64> {
    check_rate_time(lambda, t)?;
    let (a1, b1, a2, b2) = multi_index_indices(family, d)?;
    let power = a1 * 2.0;
    let kf = k as f64;
    let norm = multi_index_normalizer(family, d, lambda, t, ctl)?;
    let ln_num = kf * power * (0.5 * lambda * t).ln();
    let coef = SignedLn::new(ln_num, 1) * recip_gamma_signed(a1 * kf + b1) * recip_gamma_signed(a2 * kf + b2);
    Ok(coef.to_f64() / norm)
}

/// Indices `(a1, b1, a2, b2)` of the multi-index normalizer of each family.
pub(crate) fn multi_index_indices(family: CountFamily, d: u32) -> Result<(f64, f64, f64, f64)> {
    family_indices(family, d)?;
    let df = f64::from(d);
    match family {
        CountFamily::First => Ok((0.5 * (df - 1.0), 0.5 * df, 0.5 * (df - 1.0), 0.5 * (df - 1.0))),
        CountFamily::Second => Ok((0.5 * df - 1.0, 0.5 * df, 0.5 * df - 1.0, 0.5 * (df - 1.0))),
        CountFamily::HomogeneousPoisson => Err(Error::InvalidModel(
            "the multi-index form is defined for the First and Second families",
        )),
    }
}

/// `E_{a1,b1,a2,b2}((lt/2)^{2 a1})`, the normalizer of the multi-index form.
pub fn multi_index_normalizer(
    family: CountFamily,
    d: u32,
    lambda: f64,
    t: f64,
    ctl: &SeriesControl,
) -> Result<f64> {
    let (a1, b1, a2, b2) = multi_index_indices(family, d)?;
    multi_index_ml(a1, b1, a2, b2, (0.5 * lambda * t).powf(2.0 * a1), ctl)
}

/// Probability generating function of the `First` family:
/// `G_d(u, t) = E_{d-1,d-1}((lt)^{d-1} u) / E_{d-1,d-1}((lt)^{d-1})`.
pub fn pgf(d: u32, lambda: f64, t: f64, u: f64, ctl: &SeriesControl) -> Result<f64> {
    check_rate_time(lambda, t)?;
    let (alpha, beta) = family_indices(CountFamily::First, d)?;
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::Domain {
            what: "pgf argument must lie in [0, 1]",
            value: u,
        });
    }
    let x = (lambda * t).powf(alpha);
    let num = ln_mittag_leffler(alpha, beta, x * u, ctl)?;
    let den = ln_mittag_leffler(alpha, beta, x, ctl)?;
    Ok((num - den).exp())
}

/// Residual of `d^{d-1} f / du^{d-1} = (lt)^{d-1} f` for `f(u) = u^{d-2} G_d(u^{d-1}, t)`.
///
/// `f` is expanded as `sum_k c_k u^{(k+1)(d-1)-1}` with
/// `c_k = (lt)^{k(d-1)} / (Gamma((k+1)(d-1)) E)`; the left side differentiates
/// each power exactly (falling factorial), the right side multiplies the series.
/// Returns `|LHS - RHS| / (|RHS| + 1)`.
pub fn pgf_ode_residual(d: u32, lambda: f64, t: f64, u: f64, ctl: &SeriesControl) -> Result<f64> {
    check_rate_time(lambda, t)?;
    let (alpha, _) = family_indices(CountFamily::First, d)?;
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::Domain {
            what: "pgf ODE is checked on the open interval (0, 1)",
            value: u,
        });
    }
    let order = (d - 1) as usize;
    let ln_lt = (lambda * t).ln();
    let ln_norm = ln_mittag_leffler(alpha, alpha, (lambda * t).powf(alpha), ctl)?;
    let ln_u = u.ln();
    let coef = |k: usize| -> Result<f64> {
        let n = (k as f64 + 1.0) * alpha;
        let (lg, _) = gamma_ln(n)?;
        Ok((k as f64 * alpha * ln_lt - lg - ln_norm).exp())
    };
    let falling = |top: f64| -> f64 { (0..order).map(|j| top - j as f64).product() };

    let mut err = None;
    let mut lhs_term = |k: usize| -> f64 {
        let top = (k as f64 + 1.0) * alpha - 1.0;
        match coef(k) {
            Ok(c) => c * falling(top) * ((top - alpha) * ln_u).exp(),
            Err(e) => {
                err = Some(e);
                0.0
            }
        }
    };
    let lhs0 = lhs_term(0);
    let lhs = lhs0 + sum_series(ctl, 1, &mut lhs_term)?;
    let mut err2 = None;
    let f = sum_series(ctl, 0, |k| {
        let top = (k as f64 + 1.0) * alpha - 1.0;
        match coef(k) {
            Ok(c) => c * (top * ln_u).exp(),
            Err(e) => {
                err2 = Some(e);
                0.0
            }
        }
    })?;
    if let Some(e) = err.or(err2) {
        return Err(e);
    }
    let rhs = (alpha * ln_lt).exp() * f;
    Ok((lhs - rhs).abs() / (rhs.abs() + 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::mittag_leffler;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ctl() -> SeriesControl {
        SeriesControl::default()
    }

    fn poisson_pmf(lt: f64, k: usize) -> f64 {
        let mut p = (-lt).exp();
        for j in 1..=k {
            p *= lt / j as f64;
        }
        p
    }

    #[test]
    fn first_family_at_d2_is_poisson() {
        for &lt in &[0.1, 1.0, 5.0] {
            let dist = CountDistribution::first(2, lt, 1.0, &ctl()).unwrap();
            for k in 0..=50 {
                let p = poisson_pmf(lt, k);
                let q = dist.pmf(k);
                assert!(((q - p) / p).abs() < 1e-12, "lt={lt} k={k}: {q} vs {p}");
            }
        }
    }

    #[test]
    fn zero_count_probabilities() {
        let d3 = CountDistribution::first(3, 1.0, 1.0, &ctl()).unwrap();
        assert!((d3.pmf(0) - 1.0 / libm::sinh(1.0)).abs() < 1e-14);
        assert!((d3.pmf(0) - 0.850_918_128_239_321_6).abs() < 1e-12);
        let y3 = CountDistribution::second(3, 1.0, 1.0, &ctl()).unwrap();
        let e = core::f64::consts::E;
        for k in 0..10 {
            // (lt)^{k+1} / ((e^{lt} - 1) (k+1)!)
            let fact: f64 = (1..=k + 1).map(|j| j as f64).product();
            let expected = 1.0 / ((e - 1.0) * fact);
            assert!(((y3.pmf(k) - expected) / expected).abs() < 1e-13);
        }
    }

    #[test]
    fn invalid_families_are_rejected() {
        assert_eq!(
            CountDistribution::second(2, 1.0, 1.0, &ctl()).unwrap_err(),
            Error::InvalidModel("Second family requires dim ≥ 3")
        );
        assert!(CountDistribution::first(1, 1.0, 1.0, &ctl()).is_err());
        assert!(CountDistribution::first(3, -1.0, 1.0, &ctl()).is_err());
    }

    #[test]
    fn normalization_within_tolerance() {
        for d in 2..=6 {
            for &lt in &[0.01, 0.5, 1.0, 4.0, 10.0] {
                for fam in [CountFamily::First, CountFamily::Second] {
                    if fam == CountFamily::Second && d < 3 {
                        continue;
                    }
                    let dist = CountDistribution::new(fam, d, lt, 1.0, &ctl()).unwrap();
                    let total: f64 = (0..dist.support_len() + 40).map(|k| dist.pmf(k)).sum();
                    assert!((total - 1.0).abs() < 1e-10, "{fam:?} d={d} lt={lt}");
                    let cdf = dist.cdf_table();
                    assert!(cdf.windows(2).all(|w| w[1] >= w[0]));
                }
            }
        }
    }

    #[test]
    fn tiny_rate_time_puts_all_mass_at_zero() {
        let dist = CountDistribution::first(2, 1e-300, 1e-10, &ctl()).unwrap();
        assert_eq!(dist.pmf(0), 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!((0..1000).all(|_| dist.sample(&mut rng) == 0));
    }

    #[test]
    fn sampler_frequency_of_zero() {
        let dist = CountDistribution::first(3, 1.0, 1.0, &ctl()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 200_000;
        let zeros = (0..n).filter(|_| dist.sample(&mut rng) == 0).count();
        let p = 0.850_918_128_239_321_6;
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        assert!(((zeros as f64 / n as f64) - p).abs() < 3.0 * sigma);
    }

    #[test]
    fn sampler_mean_matches_expectation() {
        let dist = CountDistribution::second(3, 1.0, 1.0, &ctl()).unwrap();
        let mean = dist.mean();
        let var: f64 = (0..dist.support_len()).map(|k| (k as f64 - mean).powi(2) * dist.pmf(k)).sum();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 200_000;
        let s: usize = (0..n).map(|_| dist.sample(&mut rng)).sum();
        let sigma = (var / n as f64).sqrt();
        assert!((s as f64 / n as f64 - mean).abs() < 3.0 * sigma);
    }

    #[test]
    fn multi_index_form_matches() {
        for d in 2..=5u32 {
            for &lt in &[0.5, 1.0, 2.0] {
                for fam in [CountFamily::First, CountFamily::Second] {
                    let Ok(dist) = CountDistribution::new(fam, d, lt, 1.0, &ctl()) else {
                        continue;
                    };
                    for k in 0..20 {
                        let a = dist.pmf(k);
                        let b = pmf_multi_index_form(fam, d, lt, 1.0, k, &ctl()).unwrap();
                        assert!(((a - b) / a).abs() < 1e-12, "{fam:?} d={d} lt={lt} k={k}");
                    }
                }
            }
        }
        assert!(pmf_multi_index_form(CountFamily::Second, 2, 1.0, 1.0, 0, &ctl()).is_err());
    }

    #[test]
    fn pgf_examples() {
        for d in 2..=6 {
            assert!((pgf(d, 1.0, 1.0, 1.0, &ctl()).unwrap() - 1.0).abs() < 1e-15);
        }
        let g = pgf(2, 1.0, 1.0, 0.5, &ctl()).unwrap();
        assert!((g - (-0.5f64).exp()).abs() < 1e-15);
        for d in 2..=6 {
            let dist = CountDistribution::first(d, 0.7, 1.3, &ctl()).unwrap();
            let g0 = pgf(d, 0.7, 1.3, 0.0, &ctl()).unwrap();
            assert!(((g0 - dist.pmf(0)) / dist.pmf(0)).abs() < 1e-13);
            let x = 0.91f64.powi(d as i32 - 1);
            let expected = 1.0 / (libm::tgamma(f64::from(d) - 1.0) * mittag_leffler(f64::from(d) - 1.0, f64::from(d) - 1.0, x, &ctl()).unwrap());
            assert!(((g0 - expected) / expected).abs() < 1e-13);
        }
        let mut prev = 0.0;
        for i in 0..=20 {
            let g = pgf(4, 2.0, 1.0, i as f64 / 20.0, &ctl()).unwrap();
            assert!(g >= prev);
            prev = g;
        }
    }

    #[test]
    fn pgf_ode_examples() {
        for i in 1..10 {
            let u = i as f64 / 10.0;
            assert!(pgf_ode_residual(2, 1.3, 1.0, u, &ctl()).unwrap() <= 1e-10);
        }
        assert!(pgf_ode_residual(3, 1.0, 1.0, 0.5, &ctl()).unwrap() <= 1e-10);
        assert!(pgf_ode_residual(5, 0.5, 1.0, 0.25, &ctl()).unwrap() <= 1e-9);
        assert!(pgf_ode_residual(3, 1.0, 1.0, 1.0, &ctl()).is_err());
    }
}
