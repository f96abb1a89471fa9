//! Admissible partition sequences and the chaining functionals γ₂ and γ_X.

mod functional;
mod tree;
mod uniform;

pub use functional::{
    compute_gamma, evaluate_certificate, Functional, GammaMode, GammaResult, EXACT_MAX_POINTS, GREEDY_MAX_POINTS,
};
pub use tree::{block_cap, PartitionTree};
pub use uniform::{rademacher_basis_distance, uniform_space_gamma};
