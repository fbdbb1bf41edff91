//! Probability laws of the flight positions.
//!
//! All laws are radial.  Internally everything is written in the variable
//! `w = sqrt(c^2 t^2 - r^2)`, and the evaluators that back the quadratures take
//! the pair `(r, w)` so that `w` keeps full precision close to the light cone.
//!
//! The unconditional laws of `X` and `Y` have the form
//!
//! ```text
//! p(r) = f(w) / (pi^{d/2} (ct)^{d-2} E)
//! ```
//!
//! where `E` is the multi-index Mittag-Leffler normalizer of the count law and
//! `f` is the power series in `w` held by [`KgSeries`]:
//!
//! ```text
//! X: f(w) = sum_{k>=1} A^{k(d-1)} w^{k(d-1)-2} / (Gamma(k(d-1)/2) Gamma((k+1)(d-1)/2))
//! Y: f(w) = sum_{k>=1} A^{k(d-2)} w^{k(d-2)-2} / (Gamma(k(d-2)/2) Gamma((d-1)/2 + k(d-2)/2))
//! ```
//!
//! with `A = lambda / (2c)`.

use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // needed when std is absent
use num_traits::Float;

use crate::counts::{family_indices, multi_index_normalizer, CountDistribution};
use crate::quad::{integrate_radial_between, QuadResult, QuadSettings};
use crate::series::{sum_log_series, LogSum, PowerTerm, SeriesControl, SignedLn};
use crate::specfun::{bessel_i, gamma_ln, ln_mittag_leffler, multi_index_ml, recip_gamma_signed};
use crate::{Error, Result};

pub use crate::flight::Model;

/// Below this `w / (ct)` the Bessel ratio `I_1(z)/z` uses its leading terms.
const NEAR_CONE: f64 = 1e-8;

fn positive(x: f64, what: &'static str) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(what))
    }
}

/// Validates `0 <= r < ct` and returns `(ct, w)`.
fn cone(c: f64, t: f64, r: f64) -> Result<(f64, f64)> {
    positive(c, "speed c must be positive and finite")?;
    positive(t, "time t must be positive and finite")?;
    let ct = c * t;
    if !(r >= 0.0) || !(r < ct) {
        return Err(Error::Domain {
            what: "point must satisfy 0 <= r < ct",
            value: r,
        });
    }
    Ok((ct, ((ct - r) * (ct + r)).sqrt()))
}

fn check_model_dim(model: Model, d: u32) -> Result<()> {
    match model {
        Model::X => family_indices(crate::counts::CountFamily::First, d).map(|_| ()),
        Model::Y => family_indices(crate::counts::CountFamily::Second, d).map(|_| ()),
        Model::U3 if d == 3 => Ok(()),
        Model::U3 => Err(Error::InvalidModel("the even-Poisson motion lives in dim 3")),
    }
}

fn xy_only(model: Model) -> Result<()> {
    if model == Model::U3 {
        Err(Error::InvalidModel("this law is defined for the X and Y models"))
    } else {
        Ok(())
    }
}

/// `e^{x} - 1` without cancellation.
fn expm1(x: f64) -> f64 {
    libm::expm1(x)
}

/// `I_1(z) / z`, finite at `z = 0`.
fn i1_over(z: f64, ctl: &SeriesControl) -> Result<f64> {
    if z < NEAR_CONE {
        let q = z * z;
        Ok(0.5 + q / 16.0 + q * q / 384.0)
    } else {
        Ok(bessel_i(1, z, ctl)? / z)
    }
}

// ---------------------------------------------------------------------------
// Series in w

/// Finite list of power terms in `w` with strictly increasing exponents.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GammaSeries {
    terms: Vec<PowerTerm>,
}

impl GammaSeries {
    pub fn new(terms: Vec<PowerTerm>) -> Result<Self> {
        if terms.windows(2).any(|p| !(p[1].exponent > p[0].exponent)) {
            return Err(Error::InvalidParameter("series exponents must be strictly increasing"));
        }
        Ok(Self { terms })
    }

    pub fn terms(&self) -> &[PowerTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Sum of all terms at `w > 0`, accumulated in log space.
    pub fn eval(&self, w: f64) -> f64 {
        let mut s = LogSum::new();
        for t in &self.terms {
            s.add(t.at(w));
        }
        s.value()
    }
}

/// The series `f(w)` of the unconditional `X` or `Y` law (see the module docs).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KgSeries {
    model: Model,
    d: u32,
    ln_a: f64,
}

impl KgSeries {
    pub fn new(model: Model, d: u32, lambda: f64, c: f64) -> Result<Self> {
        xy_only(model)?;
        check_model_dim(model, d)?;
        positive(lambda, "rate lambda must be positive and finite")?;
        positive(c, "speed c must be positive and finite")?;
        Ok(Self {
            model,
            d,
            ln_a: (0.5 * lambda / c).ln(),
        })
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn dim(&self) -> u32 {
        self.d
    }

    /// Step `s` of the exponents: `d - 1` for `X`, `d - 2` for `Y`.
    pub fn step(&self) -> f64 {
        match self.model {
            Model::X => f64::from(self.d) - 1.0,
            _ => f64::from(self.d) - 2.0,
        }
    }

    /// Term `k >= 1`.
    pub fn term(&self, k: usize) -> PowerTerm {
        let s = self.step();
        let kf = k as f64;
        let second = match self.model {
            Model::X => 0.5 * (kf + 1.0) * s,
            _ => 0.5 * (f64::from(self.d) - 1.0) + 0.5 * kf * s,
        };
        let coef = SignedLn::new(kf * s * self.ln_a, 1) * recip_gamma_signed(0.5 * kf * s) * recip_gamma_signed(second);
        PowerTerm::new(coef, kf * s - 2.0)
    }

    /// Terms `k = 1..=k_max`.
    pub fn truncated(&self, k_max: usize) -> GammaSeries {
        GammaSeries {
            terms: (1..=k_max).map(|k| self.term(k)).collect(),
        }
    }

    pub fn ln_eval(&self, w: f64, ctl: &SeriesControl) -> Result<f64> {
        let s = sum_log_series(ctl, 1, |k| Ok(self.term(k).at(w)))?;
        Ok(s.signed_ln().ln_abs)
    }

    pub fn eval(&self, w: f64, ctl: &SeriesControl) -> Result<f64> {
        Ok(self.ln_eval(w, ctl)?.exp())
    }
}

/// `ln(pi^{d/2} (ct)^{d-2} E)`, the divisor turning `f` into a density.
pub fn ln_series_divisor(model: Model, d: u32, c: f64, lambda: f64, t: f64, ctl: &SeriesControl) -> Result<f64> {
    let fam = match model {
        Model::X => crate::counts::CountFamily::First,
        Model::Y => crate::counts::CountFamily::Second,
        Model::U3 => return Err(Error::InvalidModel("this law is defined for the X and Y models")),
    };
    let e = multi_index_normalizer(fam, d, lambda, t, ctl)?;
    Ok(0.5 * f64::from(d) * PI.ln() + (f64::from(d) - 2.0) * (c * t).ln() + e.ln())
}

// ---------------------------------------------------------------------------
// Conditional laws

fn conditional_rw(model: Model, d: u32, k: usize, ct: f64, w: f64) -> Result<f64> {
    let df = f64::from(d);
    let kf = k as f64;
    let ln = match model {
        Model::X => {
            let s = df - 1.0;
            gamma_ln(0.5 * (kf + 1.0) * s + 0.5)?.0 - gamma_ln(0.5 * kf * s)?.0
                + (0.5 * kf * s - 1.0) * (w * w).ln()
                - 0.5 * df * PI.ln()
                - ((kf + 1.0) * s - 1.0) * ct.ln()
        }
        _ => {
            let s = 0.5 * df - 1.0;
            gamma_ln((kf + 1.0) * s + 1.0)?.0 - gamma_ln(kf * s)?.0 + (kf * s - 1.0) * (w * w).ln()
                - 0.5 * df * PI.ln()
                - 2.0 * (kf + 1.0) * s * ct.ln()
        }
    };
    Ok(ln.exp())
}

/// Density of the position given `k >= 1` direction changes.
pub fn conditional_density(model: Model, d: u32, k: usize, c: f64, t: f64, r: f64) -> Result<f64> {
    xy_only(model)?;
    check_model_dim(model, d)?;
    if k == 0 {
        return Err(Error::InvalidParameter("k = 0 puts all mass on the sphere; need k ≥ 1"));
    }
    let (ct, w) = cone(c, t, r)?;
    conditional_rw(model, d, k, ct, w)
}

// ---------------------------------------------------------------------------
// Unconditional laws

fn unconditional_rw(model: Model, d: u32, c: f64, lambda: f64, t: f64, w: f64, ctl: &SeriesControl) -> Result<f64> {
    let f = KgSeries::new(model, d, lambda, c)?;
    Ok((f.ln_eval(w, ctl)? - ln_series_divisor(model, d, c, lambda, t, ctl)?).exp())
}

/// Absolutely continuous part of the law of `X_d(t)` or `Y_d(t)`, from its
/// single power series in `w`.
pub fn unconditional_density(
    model: Model,
    d: u32,
    c: f64,
    lambda: f64,
    t: f64,
    r: f64,
    ctl: &SeriesControl,
) -> Result<f64> {
    xy_only(model)?;
    check_model_dim(model, d)?;
    positive(lambda, "rate lambda must be positive and finite")?;
    let (_, w) = cone(c, t, r)?;
    unconditional_rw(model, d, c, lambda, t, w, ctl)
}

/// `sum_{k>=1} conditional(k) * pmf(k)` summed directly.
pub fn mixture_density(
    model: Model,
    d: u32,
    c: f64,
    lambda: f64,
    t: f64,
    r: f64,
    ctl: &SeriesControl,
) -> Result<f64> {
    xy_only(model)?;
    check_model_dim(model, d)?;
    let (ct, w) = cone(c, t, r)?;
    let counts = CountDistribution::new(model.count_family(), d, lambda, t, ctl)?;
    let s = sum_log_series(ctl, 1, |k| {
        let p = counts.ln_pmf(k);
        let q = conditional_rw(model, d, k, ct, w)?.ln();
        Ok(SignedLn::new(p + q, 1))
    })?;
    Ok(s.value())
}

fn closed_rw(model: Model, d: u32, c: f64, lambda: f64, t: f64, w: f64, ctl: &SeriesControl) -> Result<f64> {
    let lt = lambda * t;
    let a = 0.5 * lambda / c;
    match (model, d) {
        (Model::X, 2) => Ok(lambda / (2.0 * PI * c) * (-lt + lambda * w / c).exp() / w),
        (Model::X, 3) => Ok(a * a / (PI * libm::sinh(lt)) * (lambda / c) * i1_over(lambda * w / c, ctl)?),
        (Model::Y, 3) => {
            let e = multi_index_ml(0.5, 0.5, 0.5, 1.5, a * w, ctl)?;
            Ok(a * a / (PI * expm1(lt)) * e / w)
        }
        _ => Err(Error::InvalidModel("closed forms exist for X in dim 2, 3 and Y in dim 3")),
    }
}

/// Closed forms: Bessel for `X_3`, exponential for `X_2`, multi-index
/// Mittag-Leffler for `Y_3`.
pub fn closed_form_density(
    model: Model,
    d: u32,
    c: f64,
    lambda: f64,
    t: f64,
    r: f64,
    ctl: &SeriesControl,
) -> Result<f64> {
    positive(lambda, "rate lambda must be positive and finite")?;
    let (_, w) = cone(c, t, r)?;
    closed_rw(model, d, c, lambda, t, w, ctl)
}

/// Probability of no direction change, i.e. the mass uniform on the sphere of
/// radius `ct`.  For `U3` this is `P{N(t) <= 1}`.
pub fn singular_weight(model: Model, d: u32, lambda: f64, t: f64, ctl: &SeriesControl) -> Result<f64> {
    check_model_dim(model, d)?;
    positive(lambda, "rate lambda must be positive and finite")?;
    positive(t, "time t must be positive and finite")?;
    let lt = lambda * t;
    if model == Model::U3 {
        return Ok((-lt).exp() * (1.0 + lt));
    }
    let (alpha, beta) = family_indices(model.count_family(), d)?;
    let ln_e = ln_mittag_leffler(alpha, beta, lt.powf(alpha), ctl)?;
    Ok((-gamma_ln(beta)?.0 - ln_e).exp())
}

// ---------------------------------------------------------------------------
// Projections of the three-dimensional laws

fn plane_rw(model: Model, c: f64, lambda: f64, t: f64, w: f64) -> Result<f64> {
    let lt = lambda * t;
    let z = lambda * w / c;
    match model {
        Model::X => Ok(lambda * libm::cosh(z) / (2.0 * PI * c * libm::sinh(lt) * w)),
        Model::Y => Ok(lambda * z.exp() / (2.0 * PI * c * expm1(lt) * w)),
        Model::U3 => Err(Error::InvalidModel("projections are defined for the X and Y models")),
    }
}

/// Law of the first two coordinates of `X_3(t)` or `Y_3(t)`, including the
/// projection of the mass on the sphere.
pub fn project_plane(model: Model, c: f64, lambda: f64, t: f64, rho: f64) -> Result<f64> {
    positive(lambda, "rate lambda must be positive and finite")?;
    let (_, w) = cone(c, t, rho)?;
    plane_rw(model, c, lambda, t, w)
}

/// `lim_{rho -> 0}` of [`project_plane`].
pub fn project_plane_origin_limit(model: Model, c: f64, lambda: f64, t: f64) -> Result<f64> {
    positive(c, "speed c must be positive and finite")?;
    positive(lambda, "rate lambda must be positive and finite")?;
    positive(t, "time t must be positive and finite")?;
    let lt = lambda * t;
    let pre = lambda / (2.0 * PI * c * c * t);
    match model {
        Model::X => Ok(pre / libm::tanh(lt)),
        Model::Y => Ok(pre / -expm1(-lt)),
        Model::U3 => Err(Error::InvalidModel("projections are defined for the X and Y models")),
    }
}

fn line_rw(model: Model, c: f64, lambda: f64, t: f64, w: f64, ctl: &SeriesControl) -> Result<f64> {
    let lt = lambda * t;
    match model {
        Model::X => Ok(lambda * bessel_i(0, lambda * w / c, ctl)? / (2.0 * c * libm::sinh(lt))),
        Model::Y => {
            let ln_z = (0.5 * lambda * w / c).ln();
            let s = sum_log_series(ctl, 0, |k| {
                let g = recip_gamma_signed(0.5 * k as f64 + 1.0);
                Ok(SignedLn::new(k as f64 * ln_z, 1) * g * g)
            })?;
            Ok(lambda / (2.0 * c * expm1(lt)) * s.value())
        }
        Model::U3 => Err(Error::InvalidModel("projections are defined for the X and Y models")),
    }
}

/// Law of the first coordinate of `X_3(t)` or `Y_3(t)`.
pub fn project_line(model: Model, c: f64, lambda: f64, t: f64, x1: f64, ctl: &SeriesControl) -> Result<f64> {
    positive(lambda, "rate lambda must be positive and finite")?;
    let (_, w) = cone(c, t, x1.abs())?;
    line_rw(model, c, lambda, t, w, ctl)
}

// ---------------------------------------------------------------------------
// Even-Poisson motion

fn u3_rw(c: f64, lambda: f64, t: f64, w: f64, ctl: &SeriesControl) -> Result<f64> {
    let a = 0.5 * lambda / c;
    Ok((-lambda * t).exp() / PI * a * a * (lambda / c) * i1_over(lambda * w / c, ctl)?)
}

/// Joint density of the `U3` position and the event "odd number of Poisson
/// events" (which then is at least 3 inside the ball).
pub fn u3_density(c: f64, lambda: f64, t: f64, r: f64, ctl: &SeriesControl) -> Result<f64> {
    positive(lambda, "rate lambda must be positive and finite")?;
    let (_, w) = cone(c, t, r)?;
    u3_rw(c, lambda, t, w, ctl)
}

/// `P{N(t) odd, N(t) >= 3} = e^{-lt} (sinh(lt) - lt)`.
pub fn u3_odd_mass(lambda: f64, t: f64) -> f64 {
    let lt = lambda * t;
    (-lt).exp() * (libm::sinh(lt) - lt)
}

// ---------------------------------------------------------------------------
// Radial laws as objects

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum LawKind {
    /// Given `k >= 1` direction changes (for `U3`, given `2k + 1` events).
    Conditional(usize),
    /// The absolutely continuous part (for `U3`, the odd-event stratum).
    Unconditional,
    /// First two coordinates of a three-dimensional flight.
    ProjPlane,
    /// First coordinate of a three-dimensional flight.
    ProjLine,
}

/// A radial law together with everything needed to evaluate it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialLaw {
    model: Model,
    d: u32,
    c: f64,
    lambda: f64,
    t: f64,
    kind: LawKind,
    ctl: SeriesControl,
}

/// `2 pi^{D/2} / Gamma(D/2)`.
pub fn sphere_area(dim: u32) -> f64 {
    let h = 0.5 * f64::from(dim);
    2.0 * PI.powf(h) / libm::tgamma(h)
}

impl RadialLaw {
    pub fn new(model: Model, d: u32, c: f64, lambda: f64, t: f64, kind: LawKind, ctl: SeriesControl) -> Result<Self> {
        check_model_dim(model, d)?;
        positive(c, "speed c must be positive and finite")?;
        positive(lambda, "rate lambda must be positive and finite")?;
        positive(t, "time t must be positive and finite")?;
        match kind {
            LawKind::Conditional(0) => {
                return Err(Error::InvalidParameter("k = 0 puts all mass on the sphere; need k ≥ 1"))
            }
            LawKind::ProjPlane | LawKind::ProjLine if model == Model::U3 => {
                return Err(Error::InvalidModel("projections are defined for the X and Y models"))
            }
            LawKind::ProjPlane | LawKind::ProjLine if d != 3 => {
                return Err(Error::InvalidModel("projections are defined for three-dimensional flights"))
            }
            _ => {}
        }
        Ok(Self { model, d, c, lambda, t, kind, ctl })
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn dim(&self) -> u32 {
        self.d
    }

    pub fn kind(&self) -> LawKind {
        self.kind
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn radius(&self) -> f64 {
        self.c * self.t
    }

    /// Dimension of the space the density lives in.
    pub fn space_dim(&self) -> u32 {
        match self.kind {
            LawKind::ProjPlane => 2,
            LawKind::ProjLine => 1,
            _ => self.d,
        }
    }

    fn density_rw(&self, w: f64) -> Result<f64> {
        let ct = self.radius();
        let (m, d, c, l, t, ctl) = (self.model, self.d, self.c, self.lambda, self.t, &self.ctl);
        match (self.kind, m) {
            (LawKind::Conditional(k), Model::U3) => conditional_rw(Model::X, 3, k, ct, w),
            (LawKind::Conditional(k), _) => conditional_rw(m, d, k, ct, w),
            (LawKind::Unconditional, Model::U3) => u3_rw(c, l, t, w, ctl),
            (LawKind::Unconditional, _) => unconditional_rw(m, d, c, l, t, w, ctl),
            (LawKind::ProjPlane, _) => plane_rw(m, c, l, t, w),
            (LawKind::ProjLine, _) => line_rw(m, c, l, t, w, ctl),
        }
    }

    fn marginal_rw(&self, r: f64, w: f64) -> Result<f64> {
        let dd = self.space_dim();
        let geom = sphere_area(dd) * if dd == 1 { 1.0 } else { r.powi(dd as i32 - 1) };
        Ok(geom * self.density_rw(w)?)
    }

    /// Density at distance `r` from the origin.
    pub fn density(&self, r: f64) -> Result<f64> {
        let (_, w) = cone(self.c, self.t, r)?;
        self.density_rw(w)
    }

    /// Density of the distance `r` from the origin.
    pub fn radial_marginal(&self, r: f64) -> Result<f64> {
        let (_, w) = cone(self.c, self.t, r)?;
        self.marginal_rw(r, w)
    }

    /// Total mass the density carries: `1` for conditional laws and
    /// projections, `1 - singular_weight` for unconditional `X` and `Y`, and
    /// the odd-event probability for `U3`.
    pub fn expected_mass(&self) -> Result<f64> {
        match (self.kind, self.model) {
            (LawKind::Unconditional, Model::U3) => Ok(u3_odd_mass(self.lambda, self.t)),
            (LawKind::Unconditional, m) => Ok(1.0 - singular_weight(m, self.d, self.lambda, self.t, &self.ctl)?),
            _ => Ok(1.0),
        }
    }

    /// `int_{r0}^{r1}` of the radial marginal.
    pub fn mass_between(&self, r0: f64, r1: f64, settings: &QuadSettings) -> Result<QuadResult> {
        let ct = self.radius();
        if !(0.0 <= r0 && r0 <= r1 && r1 <= ct) {
            return Err(Error::Domain {
                what: "integration range must lie in [0, ct]",
                value: r1,
            });
        }
        let mut err = None;
        let mut f = |r: f64, w: f64| {
            if w <= 0.0 {
                return 0.0;
            }
            match self.marginal_rw(r, w) {
                Ok(v) => v,
                Err(e) => {
                    err.get_or_insert(e);
                    f64::NAN
                }
            }
        };
        let q = integrate_radial_between(&mut f, ct, r0, r1, settings);
        match err {
            Some(e) => Err(e),
            None => q,
        }
    }

    /// Quadrature of the density over the whole ball.
    pub fn total_mass(&self, settings: &QuadSettings) -> Result<QuadResult> {
        self.mass_between(0.0, self.radius(), settings)
    }
}
