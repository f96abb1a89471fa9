//! Increment metrics `d_p(s, t) = ‖X_s − X_t‖_p`, diameters and the moment functional `|||·|||_r`.

mod matrix;
mod moment_functional;
mod norm;
mod process;

pub use matrix::{diameter, DistanceMatrix, IncrementMetric, MatrixMetric, ProcessMetric, MATRIX_POINT_LIMIT};
pub use moment_functional::{moment_bracket_constants, moment_functional, moment_functional_norm};
pub use norm::{
    coefficient_norm, increment_norm, IncrementNormResult, MethodChoice, NormMethod, NormOptions, AUTO_ENUMERATION_COORDS,
    DEFAULT_MC_SAMPLES, FORCED_ENUMERATION_COORDS, MC_MAX_ORDER,
};
pub use process::{IndexSet, ProcessSpec};
