use thiserror::Error;

use crate::dist::RegularityWitness;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    /// `f(c·λ·t) ≥ λ·f(t)` failed at the reported grid point.
    #[error("sublinearity precondition violated at lambda = {lambda}, t = {t}")]
    SublinearityViolated { lambda: f64, t: f64 },

    #[error("regularity precondition failed: {0}")]
    NotRegular(Box<RegularityWitness>),

    #[error("degenerate envelope for coordinate {coordinate}: M(t_alpha) = 0")]
    DegenerateEnvelope { coordinate: usize },

    #[error("invalid partition tree at level {level}: {reason}")]
    InvalidTree { level: usize, reason: String },

    #[error("exact mode needs deterministic metrics; {0}")]
    NonDeterministicMetric(String),

    #[error("increment domination fails for pair ({s}, {t}) at p = {p}: {lhs} > {rhs}")]
    DominationViolated { s: usize, t: usize, p: f64, lhs: f64, rhs: f64 },
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
