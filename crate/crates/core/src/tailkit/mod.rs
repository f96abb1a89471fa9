//! Tail-exponent transforms: convex minorants, log-concave envelopes, growth constants and surrogates.

mod constants;
mod envelope;
mod minorant;
mod surrogate;
mod tail;

pub use constants::{
    check_moderate_growth, check_moderate_growth_on, growth_constant, regularity_constants, tail_cap, GrowthCheck,
    GrowthConstant, RegularityConstants,
};
pub use envelope::{convexity_violations, envelope_sandwich, log_concave_envelope, SandwichReport, SandwichRow};
pub use minorant::{convex_minorant, convex_minorant_with, MinorantOptions, SUBLINEARITY_LAMBDAS};
pub use surrogate::{build_surrogates, CoupledDraw, SurrogateCoordinate, SurrogateFamily};
pub use tail::{log_grid, TailFunction};
