use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::gamma::{block_cap, PartitionTree};
use crate::metric::{coefficient_norm, IncrementMetric, IndexSet, ProcessMetric, ProcessSpec};
use crate::stochlab::RngStream;

use super::metric_options;

/// Pairs whose residuals are listed individually up to this many points.
pub const RESIDUAL_LIST_POINTS: usize = 64;

/// Normalized chain step `s^k = (π_n(t) − π_{n−1}(t)) / d_{2^{n+1}}(π_n(t), π_{n−1}(t))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainPoint {
    pub k: u64,
    pub level: usize,
    pub block: usize,
    /// Index of `π_{n−1}(t)`.
    pub from: usize,
    /// Index of `π_n(t)`.
    pub to: usize,
    /// `d_{2^{n+1}}(π_n(t), π_{n−1}(t))`.
    pub weight: f64,
    pub point: Vec<f64>,
    /// `‖X_{s^k}‖_{log(k+2)}`.
    pub norm_cap: f64,
    pub norm_cap_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkippedStep {
    pub level: usize,
    pub block: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairResidual {
    pub s: usize,
    pub t: usize,
    /// Sup norm of `(s − t) − (Σchain(s) − Σchain(t))`.
    pub residual: f64,
}

/// `M_n = Σ_{j≤n} N_j` and the bound `log(M_n + 2) ≤ 2^{n+1}` that caps the chain norms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexBudget {
    pub level: usize,
    pub blocks: usize,
    pub m_n: f64,
    pub log_bound_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HullDecomposition {
    pub chain_points: Vec<ChainPoint>,
    pub skipped: Vec<SkippedStep>,
    /// `2·sup_t Σ_{n≥1} d_{2^{n+1}}(π_n(t), π_{n−1}(t))`.
    pub r: f64,
    pub largest_step: f64,
    pub max_residual: f64,
    pub residuals: Vec<PairResidual>,
    /// Largest `ℓ¹` weight needed to write some `s − t` in the chain points.
    pub max_l1_weight: f64,
    pub budget: Vec<IndexBudget>,
}

impl HullDecomposition {
    pub fn max_norm_cap(&self) -> f64 {
        self.chain_points.iter().map(|c| c.norm_cap - c.norm_cap_error).fold(0.0, f64::max)
    }

    pub fn passed(&self, tol: f64) -> bool {
        self.max_residual <= tol
            && self.max_norm_cap() <= 1.0 + tol
            && self.r.is_finite()
            && self.r + tol >= 2.0 * self.largest_step
            && self.max_l1_weight <= self.r + tol
            && self.budget.iter().all(|b| b.log_bound_ok)
    }
}

/// Writes `T − T` inside `R·conv{±s^k}` along a partition tree, with `π_n(A)` the lowest index in `A`.
pub fn convex_hull_decomposition(set: &IndexSet, tree: &PartitionTree, proc: &ProcessSpec) -> Result<HullDecomposition> {
    let n_points = set.len();
    tree.validate(n_points)?;
    let opts = metric_options(RngStream::new(0, 0));
    let metric = ProcessMetric::new(proc.clone(), set.clone(), opts)?;
    let chains = tree.chains(n_points);
    let rep: Vec<Vec<usize>> =
        tree.levels.iter().map(|l| l.iter().map(|b| *b.iter().min().expect("validated blocks are nonempty")).collect()).collect();

    let mut budget = Vec::with_capacity(tree.depth());
    let mut m_prev = 0.0;
    for (n, level) in tree.levels.iter().enumerate() {
        let m_n = m_prev + block_cap(n) as f64;
        budget.push(IndexBudget {
            level: n,
            blocks: level.len(),
            m_n,
            log_bound_ok: (m_n + 2.0).ln() <= (2.0f64).powi(n as i32 + 1),
        });
        m_prev = m_n;
    }

    let mut chain_points = Vec::new();
    let mut skipped = Vec::new();
    // step[n][b]: index into chain_points of the step ending in block b of level n
    let mut step: Vec<Vec<Option<usize>>> = vec![Vec::new()];
    for n in 1..tree.depth() {
        let order = 1u32 << (n + 1);
        let k0 = budget[n - 1].m_n as u64 + 1;
        let mut here = Vec::with_capacity(tree.levels[n].len());
        for (b, block) in tree.levels[n].iter().enumerate() {
            let parent = chains[block[0]][n - 1];
            let (from, to) = (rep[n - 1][parent], rep[n][b]);
            if from == to {
                skipped.push(SkippedStep { level: n, block: b });
                here.push(None);
                continue;
            }
            let weight = metric.distance(order, to, from)?;
            let point: Vec<f64> = set.point(to).iter().zip(set.point(from)).map(|(a, c)| (a - c) / weight).collect();
            let k = k0 + b as u64;
            let cap = coefficient_norm(proc, &point, ((k + 2) as f64).ln(), &opts)?;
            here.push(Some(chain_points.len()));
            chain_points.push(ChainPoint {
                k,
                level: n,
                block: b,
                from,
                to,
                weight,
                point,
                norm_cap: cap.value,
                norm_cap_error: cap.error_bound,
            });
        }
        step.push(here);
    }

    // Σ chain(t) rebuilt from the normalized points, and the total chain weight of t.
    let dim = set.dim();
    let root = rep[0][0];
    let mut offsets = Vec::with_capacity(n_points);
    let mut sums = Vec::with_capacity(n_points);
    for (t, chain) in chains.iter().enumerate() {
        let mut acc = vec![0.0; dim];
        let mut w = 0.0;
        for (n, &b) in chain.iter().enumerate().skip(1) {
            if let Some(i) = step[n][b] {
                let c = &chain_points[i];
                acc.iter_mut().zip(&c.point).for_each(|(a, x)| *a += c.weight * x);
                w += c.weight;
            }
        }
        // t − π₀ − Σchain(t); the telescoping sum ends at t because the last level is singletons
        let off: Vec<f64> = set.point(t).iter().zip(set.point(root)).zip(&acc).map(|((x, r), a)| x - r - a).collect();
        offsets.push(off);
        sums.push(w);
    }
    let sup_weight = sums.iter().cloned().fold(0.0, f64::max);
    let mut max_residual = 0.0f64;
    let mut max_l1_weight = 0.0f64;
    let mut residuals = Vec::new();
    for s in 0..n_points {
        for t in 0..s {
            let res = offsets[s].iter().zip(&offsets[t]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            max_residual = max_residual.max(res);
            max_l1_weight = max_l1_weight.max(sums[s] + sums[t]);
            if n_points <= RESIDUAL_LIST_POINTS {
                residuals.push(PairResidual { s, t, residual: res });
            }
        }
    }
    Ok(HullDecomposition {
        largest_step: chain_points.iter().map(|c| c.weight).fold(0.0, f64::max),
        chain_points,
        skipped,
        r: 2.0 * sup_weight,
        max_residual,
        residuals,
        max_l1_weight,
        budget,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::DistributionModel;

    #[test]
    fn two_points_one_step() {
        let proc = ProcessSpec::iid(DistributionModel::gaussian(), 2);
        let set = IndexSet::new(2, vec![vec![0.0, 0.0], vec![1.0, 2.0]]).unwrap();
        let tree = PartitionTree { levels: vec![vec![vec![0, 1]], vec![vec![0], vec![1]]] };
        let h = convex_hull_decomposition(&set, &tree, &proc).unwrap();
        assert_eq!(h.chain_points.len(), 1);
        assert_eq!(h.skipped, vec![SkippedStep { level: 1, block: 0 }]);
        let d4 = 5f64.sqrt() * 3f64.powf(0.25);
        assert!((h.r - 2.0 * d4).abs() < 1e-12);
        assert_eq!(h.max_residual, 0.0);
        assert_eq!(h.chain_points[0].k, 3);
        assert!(h.passed(1e-9));
    }

    #[test]
    fn singleton_is_empty() {
        let proc = ProcessSpec::iid(DistributionModel::gaussian(), 2);
        let set = IndexSet::new(2, vec![vec![1.0, 0.0]]).unwrap();
        let h = convex_hull_decomposition(&set, &PartitionTree::trivial(1), &proc).unwrap();
        assert!(h.chain_points.is_empty());
        assert_eq!(h.r, 0.0);
        assert!(h.passed(1e-9));
    }
}
