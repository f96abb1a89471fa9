//! Deterministic parallel Monte Carlo: supremum estimates, order statistics and inequality harnesses.

mod engine;
mod harness;
mod order;
mod rng;
mod sup;

pub use engine::{draw_process, run_chunks, SparseRows, Summary, Welford, CHUNK_SIZE};
pub use harness::{
    contraction_check, paley_zygmund_check, symmetrization_check, ContractionReport, NonnegativeLaw, PaleyZygmundReport,
    SymmetrizationPair, SymmetrizationReport,
};
pub use order::{order_stat_means, top_sum_mean, OrderStatRow};
pub use rng::RngStream;
pub use sup::{estimate_sup, process_statistics, SupTarget, SupremumEstimate, MIN_SAMPLES};
