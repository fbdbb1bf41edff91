use thiserror::Error;

/// Errors raised by the numerical kernels and samplers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("Gamma function pole at x = {0}")]
    GammaPole(f64),
    #[error("series did not converge within {max_terms} terms")]
    NonConvergence { max_terms: usize },
    #[error("series partial sum is not finite")]
    Overflow,
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("{0}")]
    InvalidModel(&'static str),
    #[error("argument {value} outside the domain: {what}")]
    Domain { what: &'static str, value: f64 },
    #[error("quadrature did not reach tolerance (estimated error {error:e})")]
    Quadrature { error: f64 },
    #[error("cumulative mass did not reach 1 - 1e-12 within {max_terms} terms")]
    Truncation { max_terms: usize },
    #[error("grid leaves the light cone: {0}")]
    Grid(&'static str),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
