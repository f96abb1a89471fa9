use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::metric::{IndexSet, ProcessSpec};

use super::rng::RngStream;

/// Samples per chunk; chunk `c` draws from `stream.child(c)`.
pub const CHUNK_SIZE: usize = 4096;

/// Running mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Welford {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Welford {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Welford) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let d = other.mean - self.mean;
        self.mean += d * other.count as f64 / n;
        self.m2 += other.m2 + d * d * self.count as f64 * other.count as f64 / n;
        self.count += other.count;
    }

    pub fn summary(&self) -> Summary {
        let n = self.count as f64;
        let variance = if self.count > 1 { self.m2 / (n - 1.0) } else { 0.0 };
        Summary { mean: self.mean, variance, stderr: (variance / n).sqrt(), count: self.count }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub variance: f64,
    pub stderr: f64,
    pub count: u64,
}

/// Runs `samples` draws in fixed chunks, in parallel, and merges chunk accumulators in chunk order.
///
/// `draw` fills `k` statistics per sample from the supplied generator. The result is bitwise
/// identical for any worker count.
pub fn run_chunks<G>(samples: usize, stream: RngStream, k: usize, draw: G) -> Vec<Summary>
where
    G: Fn(&mut ChaCha8Rng, &mut [f64]) + Sync,
{
    let chunks = samples.div_ceil(CHUNK_SIZE);
    let partial: Vec<Vec<Welford>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream.child(c as u64).rng();
            let len = CHUNK_SIZE.min(samples - c * CHUNK_SIZE);
            let mut acc = vec![Welford::default(); k];
            let mut buf = vec![0.0; k];
            for _ in 0..len {
                draw(&mut rng, &mut buf);
                for (a, &x) in acc.iter_mut().zip(&buf) {
                    a.push(x);
                }
            }
            acc
        })
        .collect();
    let mut total = vec![Welford::default(); k];
    for chunk in &partial {
        for (t, c) in total.iter_mut().zip(chunk) {
            t.merge(c);
        }
    }
    total.iter().map(Welford::summary).collect()
}

/// Nonzero coefficients of every point, for sparse evaluation of `⟨t, X⟩`.
#[derive(Debug, Clone)]
pub struct SparseRows {
    rows: Vec<Vec<(usize, f64)>>,
}

impl SparseRows {
    pub fn new(set: &IndexSet) -> Self {
        let rows = set
            .points()
            .iter()
            .map(|p| p.iter().enumerate().filter(|(_, x)| **x != 0.0).map(|(i, x)| (i, *x)).collect())
            .collect();
        Self { rows }
    }

    /// `⟨t_j, x⟩` for every point `j`.
    pub fn values(&self, x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend(self.rows.iter().map(|r| r.iter().map(|&(i, a)| a * x[i]).sum::<f64>()));
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// One draw of every coordinate of `proc`.
pub fn draw_process(proc: &ProcessSpec, rng: &mut ChaCha8Rng, x: &mut [f64]) {
    for (xi, m) in x.iter_mut().zip(proc.models()) {
        *xi = m.draw(rng);
    }
}
