use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::scalar::Real;

use super::norm::{increment_norm, IncrementNormResult, NormMethod, NormOptions};
use super::process::{IndexSet, ProcessSpec};

/// Point sets above this size are served pair by pair instead of through a full matrix.
pub const MATRIX_POINT_LIMIT: usize = 2048;

/// Family of increment distances `d_p` on points `0..len()`, indexed by integer order `p`.
pub trait IncrementMetric<F: Real>: Sync {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn distance(&self, p: u32, i: usize, j: usize) -> Result<F>;

    /// True when every distance is computed without sampling.
    fn is_deterministic(&self) -> bool {
        true
    }

    /// `Δ_p(block)`, 0 for blocks of fewer than two points.
    fn block_diameter(&self, p: u32, block: &[usize]) -> Result<F> {
        let pairs = |i: usize| -> Result<F> {
            let mut best = F::zero();
            for &b in &block[..i] {
                best = best.max(self.distance(p, block[i], b)?);
            }
            Ok(best)
        };
        if block.len() > 256 {
            let parts: Vec<F> = (1..block.len()).into_par_iter().map(pairs).collect::<Result<_>>()?;
            Ok(parts.into_iter().fold(F::zero(), F::max))
        } else {
            (1..block.len()).try_fold(F::zero(), |acc, i| Ok(acc.max(pairs(i)?)))
        }
    }
}

/// Square table of distances for one order `p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceMatrix<F = f64> {
    pub p: f64,
    pub len: usize,
    pub values: Vec<F>,
    pub errors: Vec<F>,
    pub methods: Vec<NormMethod>,
}

impl<F: Real> DistanceMatrix<F> {
    /// Matrix from explicit symmetric values (exact, zero error).
    pub fn from_values(p: f64, len: usize, values: Vec<F>) -> Result<Self> {
        if values.len() != len * len {
            return domain("distance matrix must be len × len");
        }
        for i in 0..len {
            if values[i * len + i] != F::zero() {
                return domain("distance matrix needs a zero diagonal");
            }
            for j in 0..i {
                if values[i * len + j] != values[j * len + i] || values[i * len + j] < F::zero() {
                    return domain("distance matrix must be symmetric and nonnegative");
                }
            }
        }
        Ok(Self { p, len, values, errors: vec![F::zero(); len * len], methods: vec![NormMethod::ClosedForm; len * len] })
    }

    pub fn get(&self, i: usize, j: usize) -> F {
        self.values[i * self.len + j]
    }

    pub fn error(&self, i: usize, j: usize) -> F {
        self.errors[i * self.len + j]
    }

    pub fn is_deterministic(&self) -> bool {
        self.methods.iter().all(|m| m.is_deterministic())
    }

    /// Largest entry.
    pub fn diameter(&self) -> F {
        self.values.iter().cloned().fold(F::zero(), F::max)
    }
}

/// Explicit matrices keyed by order, e.g. for synthetic metrics.
#[derive(Debug, Clone)]
pub struct MatrixMetric<F: Real> {
    len: usize,
    by_order: BTreeMap<u32, DistanceMatrix<F>>,
    fallback: Option<DistanceMatrix<F>>,
}

impl<F: Real> MatrixMetric<F> {
    /// The same distances at every order.
    pub fn uniform_in_p(matrix: DistanceMatrix<F>) -> Self {
        Self { len: matrix.len, by_order: BTreeMap::new(), fallback: Some(matrix) }
    }

    pub fn from_orders(len: usize, by_order: BTreeMap<u32, DistanceMatrix<F>>) -> Result<Self> {
        if by_order.values().any(|m| m.len != len) {
            return domain("all matrices must have the same size");
        }
        Ok(Self { len, by_order, fallback: None })
    }
}

impl<F: Real> IncrementMetric<F> for MatrixMetric<F> {
    fn len(&self) -> usize {
        self.len
    }

    fn distance(&self, p: u32, i: usize, j: usize) -> Result<F> {
        match self.by_order.get(&p).or(self.fallback.as_ref()) {
            Some(m) => Ok(m.get(i, j)),
            None => domain(format!("no distance matrix for order {p}")),
        }
    }
}

/// Increment distances of a process over an index set, cached per order.
///
/// Monte Carlo pairs draw from `options.stream.child(p).child(pair_rank)`, so every entry is
/// reproducible regardless of evaluation order or thread count.
pub struct ProcessMetric {
    proc: ProcessSpec,
    set: IndexSet,
    options: NormOptions,
    cache: Mutex<BTreeMap<u64, Arc<DistanceMatrix>>>,
}

fn pair_rank(i: usize, j: usize) -> u64 {
    let (a, b) = if i > j { (i, j) } else { (j, i) };
    (a as u64) * (a as u64 - 1) / 2 + b as u64
}

impl ProcessMetric {
    pub fn new(proc: ProcessSpec, set: IndexSet, options: NormOptions) -> Result<Self> {
        proc.check_dimension(set.dim())?;
        Ok(Self { proc, set, options, cache: Mutex::new(BTreeMap::new()) })
    }

    pub fn process(&self) -> &ProcessSpec {
        &self.proc
    }

    pub fn index_set(&self) -> &IndexSet {
        &self.set
    }

    pub fn options(&self) -> &NormOptions {
        &self.options
    }

    /// `d_p(tᵢ, tⱼ)` with its method and error bound.
    pub fn pair(&self, p: f64, i: usize, j: usize) -> Result<IncrementNormResult> {
        if i == j {
            return Ok(IncrementNormResult { value: 0.0, error_bound: 0.0, method: NormMethod::ClosedForm });
        }
        let mut opts = self.options;
        opts.stream = opts.stream.child(p.to_bits()).child(pair_rank(i, j));
        increment_norm(&self.proc, self.set.point(i), self.set.point(j), p, &opts)
    }

    /// Full matrix at order `p`, computed in parallel over pairs and cached.
    pub fn matrix(&self, p: f64) -> Result<Arc<DistanceMatrix>> {
        if let Some(m) = self.cache.lock().expect("cache lock").get(&p.to_bits()) {
            return Ok(m.clone());
        }
        let n = self.set.len();
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..i).map(move |j| (i, j))).collect();
        let results: Vec<IncrementNormResult> = pairs.par_iter().map(|&(i, j)| self.pair(p, i, j)).collect::<Result<_>>()?;
        let mut values = vec![0.0; n * n];
        let mut errors = vec![0.0; n * n];
        let mut methods = vec![NormMethod::ClosedForm; n * n];
        for (&(i, j), r) in pairs.iter().zip(&results) {
            for (a, b) in [(i, j), (j, i)] {
                values[a * n + b] = r.value;
                errors[a * n + b] = r.error_bound;
                methods[a * n + b] = r.method;
            }
        }
        let m = Arc::new(DistanceMatrix { p, len: n, values, errors, methods });
        self.cache.lock().expect("cache lock").insert(p.to_bits(), m.clone());
        Ok(m)
    }

    /// `Δ_p(T)`.
    pub fn set_diameter(&self, p: f64) -> Result<f64> {
        diameter(&self.set, &self.proc, p, &self.options)
    }
}

impl IncrementMetric<f64> for ProcessMetric {
    fn len(&self) -> usize {
        self.set.len()
    }

    fn distance(&self, p: u32, i: usize, j: usize) -> Result<f64> {
        if self.set.len() <= MATRIX_POINT_LIMIT {
            Ok(self.matrix(p as f64)?.get(i, j))
        } else {
            Ok(self.pair(p as f64, i, j)?.value)
        }
    }

    fn is_deterministic(&self) -> bool {
        use super::norm::MethodChoice;
        match self.options.choice {
            MethodChoice::Forced(m) => m.is_deterministic(),
            // Auto only samples when no exact route exists; probe the pair routes at a non-even order
            MethodChoice::Auto => {
                let n = self.set.len().min(MATRIX_POINT_LIMIT);
                let probe = |p: f64| (0..n).all(|i| (0..i).all(|j| self.pair_method(p, i, j).is_deterministic()));
                probe(1.0) && probe(2.0)
            }
        }
    }
}

impl ProcessMetric {
    fn pair_method(&self, p: f64, i: usize, j: usize) -> NormMethod {
        let mut opts = self.options;
        opts.mc_samples = 2;
        increment_norm(&self.proc, self.set.point(i), self.set.point(j), p, &opts)
            .map(|r| r.method)
            .unwrap_or(NormMethod::MonteCarlo)
    }
}

/// `Δ_p(T) = max_{s,t ∈ T} d_p(s, t)`; 0 for a singleton.
pub fn diameter(set: &IndexSet, proc: &ProcessSpec, p: f64, opts: &NormOptions) -> Result<f64> {
    if set.is_empty() {
        return domain("diameter of an empty set");
    }
    let metric = ProcessMetric::new(proc.clone(), set.clone(), *opts)?;
    let all: Vec<usize> = (0..set.len()).collect();
    let pairs: Vec<(usize, usize)> = all.iter().flat_map(|&i| (0..i).map(move |j| (i, j))).collect();
    let vals: Vec<f64> = pairs.par_iter().map(|&(i, j)| metric.pair(p, i, j).map(|r| r.value)).collect::<Result<_>>()?;
    Ok(vals.into_iter().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::DistributionModel;
    use approx::assert_relative_eq;

    #[test]
    fn diameter_examples() {
        let g = ProcessSpec::iid(DistributionModel::gaussian(), 4);
        let opts = NormOptions::default();
        assert_eq!(diameter(&IndexSet::new(4, vec![vec![1.0, 2.0, 0.0, 0.0]]).unwrap(), &g, 2.0, &opts).unwrap(), 0.0);
        assert_relative_eq!(diameter(&IndexSet::basis(4).unwrap(), &g, 2.0, &opts).unwrap(), 2f64.sqrt(), max_relative = 1e-14);
        let two = IndexSet::new(4, vec![vec![0.0; 4], vec![1.0, 1.0, 0.0, 0.0]]).unwrap();
        assert_relative_eq!(diameter(&two, &g, 2.0, &opts).unwrap(), 2f64.sqrt(), max_relative = 1e-14);
        assert!(diameter(&IndexSet::new(4, vec![]).unwrap(), &g, 2.0, &opts).is_err());
    }

    #[test]
    fn matrix_is_symmetric_and_cached() {
        let proc = ProcessSpec::iid(DistributionModel::rademacher(), 3);
        let set = IndexSet::new(3, vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 1.0], vec![1.0, 1.0, -1.0]]).unwrap();
        let m = ProcessMetric::new(proc, set, NormOptions::default()).unwrap();
        let a = m.matrix(4.0).unwrap();
        let b = m.matrix(4.0).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        for i in 0..3 {
            assert_eq!(a.get(i, i), 0.0);
            for j in 0..3 {
                assert_eq!(a.get(i, j), a.get(j, i));
            }
        }
        assert!(IncrementMetric::<f64>::is_deterministic(&m));
    }

    #[test]
    fn weibull_metric_is_not_deterministic() {
        let proc = ProcessSpec::iid(DistributionModel::sym_weibull(1.5).unwrap(), 2);
        let m = ProcessMetric::new(proc, IndexSet::basis(2).unwrap(), NormOptions::default()).unwrap();
        assert!(!IncrementMetric::<f64>::is_deterministic(&m));
    }

    #[test]
    fn f32_matrix_metric() {
        let m = DistanceMatrix::from_values(2.0, 2, vec![0.0f32, 1.5, 1.5, 0.0]).unwrap();
        let metric = MatrixMetric::uniform_in_p(m);
        assert_eq!(metric.block_diameter(8, &[0, 1]).unwrap(), 1.5f32);
        assert_eq!(metric.block_diameter(8, &[1]).unwrap(), 0.0f32);
    }
}
