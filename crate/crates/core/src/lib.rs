//! Generic-chaining functionals, increment metrics, tail transforms and Monte Carlo suprema
//! for canonical processes `X_t = Σ tᵢXᵢ` with independent standardized coordinates.
//!
//! The numerical kernels (tail functions, convex minorants, constants, quadrature, the moment
//! functional, certificates and the uniform-space oracle) are generic over [`Real`]; the
//! distribution models and Monte Carlo layers work in `f64`.

// `!(x >= a)` is the NaN-rejecting form of a domain check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dist;
pub mod error;
pub mod gamma;
pub mod metric;
pub mod quad;
pub mod scalar;
pub mod special;
pub mod stochlab;
pub mod tailkit;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::Real;

/// `f64` tail exponent.
pub type TailFn = tailkit::TailFunction<f64>;
/// `f64` envelope constants.
pub type Constants = tailkit::RegularityConstants<f64>;
/// `f64` distance table.
pub type Distances = metric::DistanceMatrix<f64>;
/// `f64` γ result.
pub type Gamma = gamma::GammaResult<f64>;
