//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SdymError {
    #[error("division by a jet whose value {value:.3e} is below the singularity threshold")]
    DivisionBySingularValue { value: f64 },

    #[error("logarithm of a jet whose value {value:.3e} is below the singularity threshold")]
    LogOfZero { value: f64 },

    #[error("operation requires a base point on the real slice (ybar = conj y, zbar = conj z)")]
    BaseOffRealSlice,

    #[error("derivative order {requested} exceeds jet truncation degree {degree}")]
    OrderTooHigh { requested: usize, degree: usize },

    #[error("jet degree {requested} exceeds the supported maximum {max}")]
    DegreeBudgetExceeded { requested: usize, max: usize },

    #[error("matrix determinant deviates from 1 by {deviation:.3e}; not unimodular")]
    NotUnimodular { deviation: f64 },

    #[error("Gauss decomposition singular: |G22| = {value:.3e}")]
    SingularDecomposition { value: f64 },

    #[error("scale parameter must have positive real part, got {re}")]
    NonPositiveScale { re: f64 },

    #[error("seed description invalid: {0}")]
    SeedInvalid(String),

    #[error("operation requires a full gauge seed; this seed carries only (f_minus, exp(-tau))")]
    FullGaugeRequired,

    #[error("quadrature node at parameter {t:.4} lies within {dist:.3e} of a singular locus")]
    SingularOnPath { t: f64, dist: f64 },

    #[error(
        "path integral did not converge (nested-rule residual {residual:.3e}); \
         a singularity probably lies on or near the integration path"
    )]
    PathSingular { residual: f64 },

    #[error("transformation input is not a physically restricted solution (residual {residual:.3e})")]
    NotPhysicallyRestricted { residual: f64 },

    #[error("transformation singular at this point: {what} = {value:.3e}")]
    SingularTransform { what: &'static str, value: f64 },

    #[error("density profile is not radially symmetric (spread {spread:.3e} at r = {r})")]
    NotRadiallySymmetric { r: f64, spread: f64 },

    #[error("tail of the radial integral did not converge (last window {last:.3e})")]
    TailNotConverged { last: f64 },

    #[error("{0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, SdymError>;
