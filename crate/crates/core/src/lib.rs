//! Random flights in `R^d` whose displacements follow Dirichlet laws and whose
//! number of direction changes follows a Mittag-Leffler-normalized generalization
//! of the Poisson law.
//!
//! The crate is `no_std` (it needs `alloc`) and contains everything that is pure
//! computation:
//!
//! | Module          | Contents                                                              |
//! |-----------------|-----------------------------------------------------------------------|
//! | [`specfun`]     | log-Gamma, Mittag-Leffler (two-parameter and multi-index), `I_0`, `I_1` |
//! | [`counts`]      | count laws of the direction changes, samplers, pgf and its ODE          |
//! | [`sampling`]    | isotropic directions and Dirichlet inter-change times                  |
//! | [`flight`]      | trajectories of `X_d(t)`, `Y_d(t)` and the even-Poisson motion `U_3`   |
//! | [`density`]     | conditional, unconditional, projected and singular laws                 |
//! | [`hyperbessel`] | power-function calculus of hyper-Bessel operators                       |
//! | [`pdecheck`]    | finite-difference residuals of the governing PDEs                       |
//! | [`quad`]        | adaptive Gauss-Kronrod quadrature                                       |
//!
//! File formats, parallel batches, statistical tests and the command-line tool
//! live in the companion `randflight` crate.
#![no_std]
// `!(x > 0.0)` rejects NaN along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![warn(missing_debug_implementations)]

extern crate alloc;

pub mod counts;
pub mod density;
mod error;
pub mod flight;
pub mod hyperbessel;
pub mod pdecheck;
pub mod quad;
pub mod sampling;
pub mod series;
pub mod specfun;

pub use error::{Error, Result};
pub use series::{PowerTerm, SeriesControl, SignedLn};
