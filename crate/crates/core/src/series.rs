//! Series plumbing shared by the special functions, the densities and the
//! hyper-Bessel calculus: truncation control, compensated accumulation and
//! log-magnitude coefficients with an explicit sign.

#[allow(unused_imports)] // needed when std is absent
use num_traits::Float;

use crate::{Error, Result};

/// Truncation control for adaptive series summation.
///
/// Summation stops at the first term with `|term| <= rel_tol * |partial_sum|`;
/// running out of `max_terms` is an error.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SeriesControl {
    pub rel_tol: f64,
    pub max_terms: usize,
}

impl Default for SeriesControl {
    fn default() -> Self {
        Self {
            rel_tol: 1e-14,
            max_terms: 512,
        }
    }
}

impl SeriesControl {
    pub fn new(rel_tol: f64, max_terms: usize) -> Result<Self> {
        if !(rel_tol > 0.0) || !rel_tol.is_finite() {
            return Err(Error::InvalidParameter("rel_tol must be a positive finite number"));
        }
        if max_terms == 0 {
            return Err(Error::InvalidParameter("max_terms must be at least 1"));
        }
        Ok(Self { rel_tol, max_terms })
    }

    pub fn with_max_terms(self, max_terms: usize) -> Result<Self> {
        Self::new(self.rel_tol, max_terms)
    }
}

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct Compensated {
    sum: f64,
    comp: f64,
}

impl Compensated {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn scale(&mut self, factor: f64) {
        self.sum *= factor;
        self.comp *= factor;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl core::iter::FromIterator<f64> for Compensated {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Compensated::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// A real number held as `sign * exp(ln_abs)`; `sign == 0` is an exact zero.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SignedLn {
    pub ln_abs: f64,
    pub sign: i8,
}

impl SignedLn {
    pub const ZERO: SignedLn = SignedLn {
        ln_abs: f64::NEG_INFINITY,
        sign: 0,
    };
    pub const ONE: SignedLn = SignedLn { ln_abs: 0.0, sign: 1 };

    pub fn new(ln_abs: f64, sign: i8) -> Self {
        if sign == 0 || ln_abs == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            Self {
                ln_abs,
                sign: sign.signum(),
            }
        }
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            Self::new(x.abs().ln(), if x > 0.0 { 1 } else { -1 })
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn to_f64(self) -> f64 {
        if self.is_zero() {
            0.0
        } else {
            f64::from(self.sign) * self.ln_abs.exp()
        }
    }

    pub fn recip(self) -> Self {
        // 1/0 has no representation; callers only invert Gamma values, which are never zero.
        debug_assert!(!self.is_zero());
        Self::new(-self.ln_abs, self.sign)
    }

    /// `self^n` for a real exponent; only defined for positive values or integer `n`.
    pub fn powf(self, n: f64) -> Self {
        if self.is_zero() {
            return if n == 0.0 { Self::ONE } else { Self::ZERO };
        }
        let sign = if self.sign < 0 && (n % 2.0).abs() == 1.0 { -1 } else { 1 };
        Self::new(self.ln_abs * n, sign)
    }
}

impl core::ops::Mul for SignedLn {
    type Output = SignedLn;
    fn mul(self, rhs: SignedLn) -> SignedLn {
        if self.is_zero() || rhs.is_zero() {
            SignedLn::ZERO
        } else {
            SignedLn::new(self.ln_abs + rhs.ln_abs, self.sign * rhs.sign)
        }
    }
}

impl core::ops::Div for SignedLn {
    type Output = SignedLn;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: SignedLn) -> SignedLn {
        self * rhs.recip()
    }
}

/// A single term `coef * w^exponent`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PowerTerm {
    pub coef: SignedLn,
    pub exponent: f64,
}

impl PowerTerm {
    pub fn new(coef: SignedLn, exponent: f64) -> Self {
        Self { coef, exponent }
    }

    pub fn zero(exponent: f64) -> Self {
        Self::new(SignedLn::ZERO, exponent)
    }

    pub fn is_zero(&self) -> bool {
        self.coef.is_zero()
    }

    pub fn coefficient(&self) -> f64 {
        self.coef.to_f64()
    }

    /// `coef * w^exponent` as a signed log, for `w > 0`.
    pub fn at(&self, w: f64) -> SignedLn {
        if self.is_zero() {
            SignedLn::ZERO
        } else {
            SignedLn::new(self.coef.ln_abs + self.exponent * w.ln(), self.coef.sign)
        }
    }

    pub fn eval(&self, w: f64) -> f64 {
        self.at(w).to_f64()
    }
}

/// Accumulates terms given in log-magnitude form without overflow: the running
/// sum is stored as `exp(shift) * acc`.
#[derive(Debug, Clone, Copy)]
pub struct LogSum {
    shift: f64,
    acc: Compensated,
}

impl Default for LogSum {
    fn default() -> Self {
        Self {
            shift: f64::NEG_INFINITY,
            acc: Compensated::new(),
        }
    }
}

impl LogSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, term: SignedLn) {
        if term.is_zero() {
            return;
        }
        if term.ln_abs > self.shift {
            if self.shift.is_finite() {
                self.acc.scale((self.shift - term.ln_abs).exp());
            }
            self.shift = term.ln_abs;
        }
        self.acc.add(f64::from(term.sign) * (term.ln_abs - self.shift).exp());
    }

    pub fn signed_ln(&self) -> SignedLn {
        let v = self.acc.value();
        if v == 0.0 || !self.shift.is_finite() {
            SignedLn::ZERO
        } else {
            SignedLn::new(self.shift + v.abs().ln(), if v > 0.0 { 1 } else { -1 })
        }
    }

    pub fn value(&self) -> f64 {
        self.signed_ln().to_f64()
    }

    /// True when `term` is negligible against the running sum at tolerance `rel_tol`.
    fn absorbs(&self, term: SignedLn, rel_tol: f64) -> bool {
        if term.is_zero() {
            return true;
        }
        let s = self.signed_ln();
        !s.is_zero() && term.ln_abs <= rel_tol.ln() + s.ln_abs
    }
}

/// Sums `term(k)` for `k = start, start+1, ...` until a term is negligible
/// against the partial sum. Terms are supplied in log form.
pub fn sum_log_series<F>(ctl: &SeriesControl, start: usize, mut term: F) -> Result<LogSum>
where
    F: FnMut(usize) -> Result<SignedLn>,
{
    let mut sum = LogSum::new();
    for k in start..start + ctl.max_terms {
        let t = term(k)?;
        sum.add(t);
        if (!t.is_zero() && !t.ln_abs.is_finite()) || !sum.acc.value().is_finite() {
            return Err(Error::Overflow);
        }
        if sum.absorbs(t, ctl.rel_tol) {
            return Ok(sum);
        }
    }
    Err(Error::NonConvergence {
        max_terms: ctl.max_terms,
    })
}

/// Same as [`sum_log_series`] for terms that are cheap to form directly.
pub fn sum_series<F>(ctl: &SeriesControl, start: usize, mut term: F) -> Result<f64>
where
    F: FnMut(usize) -> f64,
{
    let mut acc = Compensated::new();
    for k in start..start + ctl.max_terms {
        let t = term(k);
        acc.add(t);
        let s = acc.value();
        if !s.is_finite() {
            return Err(Error::Overflow);
        }
        if t.abs() <= ctl.rel_tol * s.abs() {
            return Ok(s);
        }
    }
    Err(Error::NonConvergence {
        max_terms: ctl.max_terms,
    })
}
