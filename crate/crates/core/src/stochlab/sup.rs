use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::metric::{IndexSet, ProcessSpec};

use super::engine::{draw_process, run_chunks, SparseRows, Summary};
use super::rng::RngStream;

pub const MIN_SAMPLES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SupTarget {
    /// `sup_{s,t} (X_s − X_t) = max_t X_t − min_t X_t`.
    SupIncrements,
    /// `sup_t |X_t|`.
    SupAbs,
    /// `sup_t X_t`.
    MaxOnly,
}

impl SupTarget {
    pub fn apply(self, values: &[f64]) -> f64 {
        let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
        match self {
            SupTarget::SupIncrements => hi - lo,
            SupTarget::SupAbs => hi.abs().max(lo.abs()),
            SupTarget::MaxOnly => hi,
        }
    }
}

/// Monte Carlo estimate with `stderr = sd/√samples`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupremumEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
    pub seed: u64,
    pub stream_id: u64,
    pub target: SupTarget,
}

impl SupremumEstimate {
    pub(crate) fn from_summary(s: Summary, stream: RngStream, target: SupTarget) -> Self {
        Self {
            mean: s.mean,
            stderr: s.stderr,
            samples: s.count as usize,
            seed: stream.master_seed,
            stream_id: stream.stream_id,
            target,
        }
    }
}

pub(crate) fn check_inputs(proc: &ProcessSpec, set: &IndexSet, samples: usize) -> Result<()> {
    if set.is_empty() {
        return domain("index set is empty");
    }
    if samples < MIN_SAMPLES {
        return domain(format!("at least {MIN_SAMPLES} samples are required"));
    }
    proc.check_dimension(set.dim())
}

/// Runs the process over `set` and summarizes `k` statistics of the vector `(X_t)_{t∈T}`.
pub fn process_statistics<G>(
    proc: &ProcessSpec,
    set: &IndexSet,
    samples: usize,
    stream: RngStream,
    k: usize,
    stat: G,
) -> Result<Vec<Summary>>
where
    G: Fn(&[f64], &mut [f64]) + Sync,
{
    check_inputs(proc, set, samples)?;
    let rows = SparseRows::new(set);
    let n = proc.dimension();
    Ok(run_chunks(samples, stream, k, |rng, out| {
        let mut x = vec![0.0; n];
        let mut values = Vec::with_capacity(rows.len());
        draw_process(proc, rng, &mut x);
        rows.values(&x, &mut values);
        stat(&values, out);
    }))
}

/// `E sup` of the chosen target over a finite `T`.
pub fn estimate_sup(
    proc: &ProcessSpec,
    set: &IndexSet,
    samples: usize,
    stream: RngStream,
    target: SupTarget,
) -> Result<SupremumEstimate> {
    let s = process_statistics(proc, set, samples, stream, 1, |v, out| out[0] = target.apply(v))?;
    Ok(SupremumEstimate::from_summary(s[0], stream, target))
}
