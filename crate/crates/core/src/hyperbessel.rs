//! Hyper-Bessel operators `L = x^{a_1} D x^{a_2} ... x^{a_n} D x^{a_{n+1}}` and
//! their action on power functions.
//!
//! Writing `a = sum a_k` and `m = |a - n|`, the operator factors as
//!
//! ```text
//! L f = m^n x^{a-n} prod_{k=1}^n x^{m - m b_k} D_m x^{m b_k} f,   D_m = m^{-1} x^{1-m} D,
//! b_k = (sum_{i>k} a_i + k - n) / m,
//! ```
//!
//! and for `a < n` its integer powers are `L^r = m^{nr} x^{-mr} prod_k I_m^{b_k,-r}`
//! with the fractional integrals
//!
//! ```text
//! I_m^{eta,alpha} f(x) = x^{-m eta - m alpha} / Gamma(alpha) int_0^x (x^m - u^m)^{alpha-1} u^{m eta} f(u) d(u^m)   (alpha > 0)
//! I_m^{eta,alpha} f    = (eta + alpha + 1) I_m^{eta,alpha+1} f + (1/m) I_m^{eta,alpha+1} (x f')              (alpha <= 0)
//! ```
//!
//! On `x^beta` this is the Gamma ratio `Gamma(eta + beta/m + 1) / Gamma(alpha + eta + 1 + beta/m)`.
//!
//! The radial part of the d'Alembertian in `w = sqrt(c^2 t^2 - r^2)` is
//! `D^2 + (d/w) D`, i.e. `(a_1, a_2, a_3) = (-d, d, 0)`, `m = 2`,
//! `b = ((d-1)/2, 0)`.  The conditions on `b_k` that make the factorization
//! valid on the analytic function spaces are assumed, not checked.

use alloc::vec::Vec;

#[allow(unused_imports)] // needed when std is absent
use num_traits::Float;

use crate::density::{KgSeries, Model};
use crate::quad::{integrate, QuadSettings};
use crate::series::{PowerTerm, SignedLn};
use crate::specfun::{gamma_signed, recip_gamma_signed, reciprocal_gamma};
use crate::{Error, Result};

/// Constants of the factorized form.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalForm {
    pub m: f64,
    pub a_sum: f64,
    pub b: Vec<f64>,
}

/// `x^{a_1} D x^{a_2} ... D x^{a_{n+1}}`.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperBesselOp {
    a: Vec<f64>,
}

impl HyperBesselOp {
    pub fn new(a: Vec<f64>) -> Result<Self> {
        if a.len() < 2 {
            return Err(Error::InvalidParameter("a hyper-Bessel operator needs n ≥ 1 derivatives"));
        }
        if a.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("exponents must be finite"));
        }
        Ok(Self { a })
    }

    /// `D^2 + (d/w) D = w^{-d} D w^d D`.
    pub fn radial(d: u32) -> Self {
        let df = f64::from(d);
        Self {
            a: alloc::vec![-df, df, 0.0],
        }
    }

    pub fn exponents(&self) -> &[f64] {
        &self.a
    }

    /// Number of derivatives.
    pub fn order(&self) -> usize {
        self.a.len() - 1
    }

    pub fn normal_form(&self) -> Result<NormalForm> {
        normal_form(&self.a)
    }

    /// `L x^beta` by applying the factors right to left.
    pub fn apply_to_power(&self, beta: f64) -> PowerTerm {
        let mut coef = 1.0;
        let mut e = beta;
        for (i, &ak) in self.a.iter().enumerate().rev() {
            e += ak;
            if i > 0 {
                coef *= e;
                e -= 1.0;
            }
        }
        PowerTerm::new(SignedLn::from_f64(coef), e)
    }

    /// `L x^beta` through the factorized form.
    pub fn apply_to_power_normal(&self, beta: f64) -> Result<PowerTerm> {
        let nf = self.normal_form()?;
        let n = self.order();
        let m = nf.m;
        let mut coef = 1.0;
        let mut e = beta;
        for &bk in nf.b.iter().rev() {
            e += m * bk;
            // D_m x^e = (e / m) x^{e - m}
            coef *= e / m;
            e += -m + m - m * bk;
        }
        coef *= m.powi(n as i32);
        e += nf.a_sum - n as f64;
        Ok(PowerTerm::new(SignedLn::from_f64(coef), e))
    }
}

pub fn normal_form(a: &[f64]) -> Result<NormalForm> {
    if a.len() < 2 {
        return Err(Error::InvalidParameter("a hyper-Bessel operator needs n ≥ 1 derivatives"));
    }
    let n = a.len() - 1;
    let a_sum: f64 = a.iter().sum();
    let m = (a_sum - n as f64).abs();
    if !(m > 0.0) {
        return Err(Error::InvalidParameter("degenerate operator: m = |a - n| = 0"));
    }
    let b = (1..=n)
        .map(|k| (a[k..].iter().sum::<f64>() + k as f64 - n as f64) / m)
        .collect();
    Ok(NormalForm { m, a_sum, b })
}

/// `I_m^{eta,alpha} x^beta` as a Gamma ratio (zero when the denominator sits on a pole).
pub fn frac_int_power(m: f64, eta: f64, alpha: f64, beta: f64) -> Result<PowerTerm> {
    let top = eta + beta / m + 1.0;
    if !(m > 0.0) || !(top > 0.0) {
        return Err(Error::Domain {
            what: "fractional integral of x^beta needs m > 0 and eta + beta/m + 1 > 0",
            value: top,
        });
    }
    Ok(PowerTerm::new(gamma_signed(top)? * recip_gamma_signed(alpha + top), beta))
}

/// `(I_m^{eta,alpha} x^beta)(1)` from the integral definition, reaching
/// `alpha <= 0` through the recursion in `alpha`.
pub fn frac_int_power_quadrature(m: f64, eta: f64, alpha: f64, beta: f64, settings: &QuadSettings) -> Result<f64> {
    let e = eta + beta / m;
    if !(m > 0.0) || !(e + 1.0 > 0.0) {
        return Err(Error::Domain {
            what: "fractional integral of x^beta needs m > 0 and eta + beta/m + 1 > 0",
            value: e + 1.0,
        });
    }
    // x d/dx x^beta = beta x^beta, so each recursion step is a scalar factor.
    let mut factor = 1.0;
    let mut al = alpha;
    while al <= 0.0 {
        factor *= eta + al + 1.0 + beta / m;
        al += 1.0;
    }
    // With v = u^m at x = 1: int_0^1 (1 - v)^{al-1} v^e dv / Gamma(al), split at 1/2
    // and desingularized by v = s^{1/(e+1)} on the left and 1 - v = s^{1/al} on the right.
    let left = integrate(
        |s| {
            let v = s.powf(1.0 / (e + 1.0));
            (1.0 - v).powf(al - 1.0) / (e + 1.0)
        },
        0.0,
        0.5f64.powf(e + 1.0),
        settings,
    )?;
    let right = integrate(
        |s| {
            let v = 1.0 - s.powf(1.0 / al);
            v.powf(e) / al
        },
        0.0,
        0.5f64.powf(al),
        settings,
    )?;
    Ok(factor * (left.value + right.value) * reciprocal_gamma(al))
}

fn l_power_check(d: u32, beta: f64) -> Result<()> {
    let h = 0.5 * beta + 1.0;
    if !(h > 0.0) || !(h + 0.5 * (f64::from(d) - 1.0) > 0.0) {
        return Err(Error::Domain {
            what: "L^r w^beta needs beta/2 + 1 > 0",
            value: beta,
        });
    }
    Ok(())
}

/// `L^r w^beta` for the radial operator `D^2 + (d/w) D`:
/// `4^r Gamma(beta/2 + (d+1)/2) Gamma(beta/2 + 1) / (Gamma(beta/2 + (d+1)/2 - r) Gamma(beta/2 + 1 - r)) w^{beta - 2r}`.
pub fn l_power_on_power(d: u32, r: u32, beta: f64) -> Result<PowerTerm> {
    l_power_check(d, beta)?;
    let rf = f64::from(r);
    let p = 0.5 * beta + 0.5 * (f64::from(d) + 1.0);
    let q = 0.5 * beta + 1.0;
    let coef = SignedLn::new(rf * 4f64.ln(), 1)
        * gamma_signed(p)?
        * gamma_signed(q)?
        * recip_gamma_signed(p - rf)
        * recip_gamma_signed(q - rf);
    Ok(PowerTerm::new(coef, beta - 2.0 * rf))
}

/// `L^r w^beta = 4^r w^{-2r} I_2^{b_1,-r} I_2^{b_2,-r} w^beta` with `(b_1, b_2)` from
/// the normal form of the radial operator.
pub fn l_power_by_composition(d: u32, r: u32, beta: f64) -> Result<PowerTerm> {
    let nf = HyperBesselOp::radial(d).normal_form()?;
    let rf = f64::from(r);
    let mut term = PowerTerm::new(SignedLn::ONE, beta);
    for &bk in nf.b.iter().rev() {
        let f = frac_int_power(nf.m, bk, -rf, term.exponent)?;
        term = PowerTerm::new(term.coef * f.coef, f.exponent);
    }
    let scale = SignedLn::new(rf * (nf.b.len() as f64) * nf.m.ln(), 1);
    Ok(PowerTerm::new(term.coef * scale, term.exponent - nf.m * rf))
}

/// Outcome of the term-wise check of `L^p f = eigenvalue f + source`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct EigenReport {
    pub model: Model,
    pub d: u32,
    /// Power `p` of `L`: `d - 1` for `X`, `d - 2` for `Y`.
    pub power: u32,
    pub eigenvalue: f64,
    pub terms_checked: usize,
    pub max_rel_mismatch: f64,
    /// Coefficient of the `w^{-d}` source (`Y` only).
    pub source_coefficient: Option<f64>,
    pub source_exponent: Option<f64>,
    pub source_is_exactly_zero: bool,
    /// Indices `k` whose image under `L^p` vanishes exactly.
    pub annihilated_terms: Vec<usize>,
}

impl EigenReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_rel_mismatch <= tol
    }
}

fn rel_mismatch(a: SignedLn, b: SignedLn) -> f64 {
    match (a.is_zero(), b.is_zero()) {
        (true, true) => 0.0,
        (true, false) | (false, true) => 1.0,
        _ if a.sign != b.sign => 2.0,
        _ => (a.ln_abs - b.ln_abs).exp_m1().abs(),
    }
}

/// Applies `L^p` term by term to the first `k_terms` terms of the series `f`
/// of the unconditional law and compares each image with `eigenvalue * f` (and
/// for `Y` with the source term) coefficient by coefficient.
pub fn eigen_check(model: Model, d: u32, lambda: f64, c: f64, k_terms: usize) -> Result<EigenReport> {
    let f = KgSeries::new(model, d, lambda, c)?;
    if k_terms < d as usize + 2 {
        return Err(Error::InvalidParameter("eigen check needs at least d + 2 terms"));
    }
    let power = match model {
        Model::X => d - 1,
        _ => d - 2,
    };
    let ln_eigen = 2.0 * f64::from(power) * (lambda / c).ln();
    let (source, source_exponent) = if model == Model::Y {
        let df = f64::from(d);
        let s = SignedLn::new((df - 2.0) * (2.0 * lambda / c).ln(), 1)
            * recip_gamma_signed(0.5)
            * recip_gamma_signed(1.0 - 0.5 * df);
        (Some(s), Some(-df))
    } else {
        (None, None)
    };
    let mut worst: f64 = 0.0;
    let mut annihilated = Vec::new();
    for k in 1..=k_terms {
        let t = f.term(k);
        let image = l_power_on_power(d, power, t.exponent)?;
        let lhs = PowerTerm::new(t.coef * image.coef, image.exponent);
        if lhs.is_zero() {
            annihilated.push(k);
        }
        let rhs = match k {
            1 => source.unwrap_or(SignedLn::ZERO),
            2 => SignedLn::ZERO,
            _ => {
                let g = f.term(k - 2);
                debug_assert!((g.exponent - lhs.exponent).abs() < 1e-9);
                g.coef * SignedLn::new(ln_eigen, 1)
            }
        };
        if k == 1 {
            if let Some(e) = source_exponent {
                debug_assert!((e - lhs.exponent).abs() < 1e-9);
            }
        }
        worst = worst.max(rel_mismatch(lhs.coef, rhs));
    }
    Ok(EigenReport {
        model,
        d,
        power,
        eigenvalue: ln_eigen.exp(),
        terms_checked: k_terms,
        max_rel_mismatch: worst,
        source_coefficient: source.map(|s| s.to_f64()),
        source_exponent,
        source_is_exactly_zero: source.is_some_and(|s| s.is_zero()),
        annihilated_terms: annihilated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn normal_form_examples() {
        for d in 1..=6u32 {
            let nf = HyperBesselOp::radial(d).normal_form().unwrap();
            assert_eq!(nf.m, 2.0);
            assert_eq!(nf.a_sum, 0.0);
            assert_eq!(nf.b, alloc::vec![0.5 * (f64::from(d) - 1.0), 0.0]);
        }
        // b_1 = (0 + 1 - 2)/2, b_2 = (0 + 2 - 2)/2
        let nf = normal_form(&[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(nf.b, alloc::vec![-0.5, 0.0]);
        assert!(normal_form(&[1.0, 0.0]).is_err());
        assert!(normal_form(&[0.0]).is_err());
    }

    #[test]
    fn normal_form_reproduces_operator() {
        let ops = [
            alloc::vec![-3.0, 3.0, 0.0],
            alloc::vec![0.5, -1.0, 0.25],
            alloc::vec![-1.0, 0.0, 0.0, 2.0],
            alloc::vec![0.0, 0.0, 0.0, 0.0, 0.0],
        ];
        for a in ops {
            let op = HyperBesselOp::new(a).unwrap();
            for &beta in &[0.5, 2.0, 3.7, 7.0] {
                let direct = op.apply_to_power(beta);
                let nf = op.apply_to_power_normal(beta).unwrap();
                assert!((direct.exponent - nf.exponent).abs() < 1e-12);
                assert!((direct.coefficient() - nf.coefficient()).abs() <= 1e-12 * direct.coefficient().abs().max(1.0));
            }
        }
    }

    #[test]
    fn frac_int_examples() {
        for &(m, eta, beta) in &[(2.0, 0.0, 0.0), (1.0, 0.3, 2.5), (3.0, -0.2, 1.0)] {
            let t = frac_int_power(m, eta, 0.0, beta).unwrap();
            assert!((t.coefficient() - 1.0).abs() < 1e-14);
            assert_eq!(t.exponent, beta);
        }
        assert!((frac_int_power(2.0, 0.0, 1.0, 0.0).unwrap().coefficient() - 1.0).abs() < 1e-15);
        let z = frac_int_power(2.0, 0.0, -2.0, 2.0).unwrap();
        assert!(z.is_zero() && z.coefficient() == 0.0);
        assert!(frac_int_power(2.0, -1.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn integral_path_matches_gamma_ratio() {
        let q = QuadSettings::default();
        for &(m, eta, alpha, beta) in &[
            (2.0, 0.0, 0.5, 1.0),
            (2.0, 1.0, 1.5, 0.3),
            (1.0, 0.2, 0.25, -0.5),
            (2.0, 1.0, -2.0, 4.0),
            (2.0, 0.0, -1.5, 3.0),
            (3.0, 0.5, -0.3, 2.0),
        ] {
            let g = frac_int_power(m, eta, alpha, beta).unwrap().coefficient();
            let i = frac_int_power_quadrature(m, eta, alpha, beta, &q).unwrap();
            assert!((g - i).abs() <= 1e-10 * g.abs().max(1.0), "{m} {eta} {alpha} {beta}: {g} vs {i}");
        }
    }

    #[test]
    fn l_power_examples() {
        let t = l_power_on_power(3, 1, 2.0).unwrap();
        assert!((t.coefficient() - 8.0).abs() < 1e-13);
        assert_eq!(t.exponent, 0.0);
        assert!(l_power_on_power(3, 1, 0.0).unwrap().is_zero());
        // beta/2 + 1 - r = -1 is a pole
        assert!(l_power_on_power(5, 4, 4.0).unwrap().is_zero());
        assert!(l_power_on_power(3, 1, -2.5).is_err());
    }

    #[test]
    fn l_power_matches_direct_differentiation() {
        for d in 1..=6u32 {
            let op = HyperBesselOp::radial(d);
            for &beta in &[2.0, 4.0, 6.0, 1.5, 3.25] {
                let once = op.apply_to_power(beta);
                let twice = op.apply_to_power(once.exponent);
                let direct1 = once.coefficient();
                let direct2 = direct1 * twice.coefficient();
                let g1 = l_power_on_power(d, 1, beta).unwrap();
                let g2 = l_power_on_power(d, 2, beta).unwrap();
                assert!((g1.coefficient() - direct1).abs() <= 1e-12 * direct1.abs().max(1.0));
                assert!((g2.coefficient() - direct2).abs() <= 1e-12 * direct2.abs().max(1.0));
                assert_eq!(g2.exponent, beta - 4.0);
                if beta.fract() == 0.0 {
                    // integer arithmetic: beta (beta + d - 1)
                    let b = beta as i64;
                    assert_eq!(direct1.round() as i64, b * (b + i64::from(d) - 1));
                }
            }
        }
    }

    #[test]
    fn composition_of_fractional_integrals() {
        for d in 2..=6u32 {
            for r in 1..=5u32 {
                for &beta in &[-0.5, 0.7, 3.0, 10.0] {
                    let a = l_power_on_power(d, r, beta).unwrap();
                    let b = l_power_by_composition(d, r, beta).unwrap();
                    assert_eq!(a.exponent, b.exponent);
                    if a.is_zero() {
                        assert!(b.is_zero());
                    } else {
                        assert!(rel(a.coefficient(), b.coefficient()) < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn eigen_relations() {
        for d in 2..=6 {
            let rep = eigen_check(Model::X, d, 1.3, 0.7, 40).unwrap();
            assert!(rep.passes(1e-10), "X d={d}: {}", rep.max_rel_mismatch);
            assert!(rep.annihilated_terms.contains(&2));
        }
        for d in 3..=6 {
            let rep = eigen_check(Model::Y, d, 1.3, 0.7, 40).unwrap();
            assert!(rep.passes(1e-10), "Y d={d}: {}", rep.max_rel_mismatch);
            assert_eq!(rep.source_is_exactly_zero, d % 2 == 0);
            assert_eq!(rep.source_exponent, Some(-f64::from(d)));
        }
        let y3 = eigen_check(Model::Y, 3, 1.0, 1.0, 10).unwrap();
        // (2 lambda / c) / (sqrt(pi) Gamma(-1/2)) = 2 / (sqrt(pi) * -2 sqrt(pi)) = -1/pi
        assert!(rel(y3.source_coefficient.unwrap(), -1.0 / core::f64::consts::PI) < 1e-14);
        assert!(eigen_check(Model::X, 3, 1.0, 1.0, 3).is_err());
    }

    #[test]
    fn a_wrong_eigenvalue_is_detected() {
        // Same series, rate perturbed in the eigenvalue only.
        let good = eigen_check(Model::X, 3, 1.0, 1.0, 20).unwrap();
        let f = KgSeries::new(Model::X, 3, 1.0, 1.0).unwrap();
        let t = f.term(5);
        let img = l_power_on_power(3, 2, t.exponent).unwrap();
        let lhs = t.coef * img.coef;
        let rhs = f.term(3).coef * SignedLn::from_f64(1.01);
        assert!(rel_mismatch(lhs, rhs) > 1e3 * good.max_rel_mismatch.max(1e-16));
    }
}
