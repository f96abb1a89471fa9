//! Experiment suites for the chaining bounds: Sudakov minoration, two-sided γ ratios, weak and
//! strong moments, comparison of processes, packing and interleaving constructions, and the
//! convex-hull decomposition of `T − T`.
//!
//! Every experiment returns a serializable report carrying its inputs, estimates and pass flags.

mod comparison;
mod hull;
mod sets;
mod sudakov;
mod two_sided;
mod weak_strong;

pub use comparison::{comparison_experiment, ComparisonReport, FrontierPoint, TailRow, C_GRID, QUANTILE_GRID};
pub use hull::{
    convex_hull_decomposition, ChainPoint, HullDecomposition, IndexBudget, PairResidual, SkippedStep, RESIDUAL_LIST_POINTS,
};
pub use sets::{binomial, interleave, packing_set, sphere_random};
pub use sudakov::{
    interleave_chain_check, packing_chain_check, sudakov_experiment, InterleaveChainReport, OffendingPair, PackingChainReport,
    SudakovReport,
};
pub use two_sided::{two_sided_experiment, uniform_gamma, TwoSidedReport};
pub use weak_strong::{weak_strong_experiment, WeakStrongReport};

use crate::metric::NormOptions;
use crate::stochlab::RngStream;

/// Sub-stream reserved for Monte Carlo distances, away from the chunk streams of the estimates.
const METRIC_STREAM: u64 = u64::MAX;

pub(crate) fn metric_options(stream: RngStream) -> NormOptions {
    NormOptions { stream: stream.child(METRIC_STREAM), ..NormOptions::default() }
}

/// Floating-point slack for comparing quantities of size `x`.
pub(crate) fn relative_slack(x: f64) -> f64 {
    1e-12 * x.abs().max(1.0)
}
