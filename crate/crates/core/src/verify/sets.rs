use itertools::Itertools;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{domain, Result};
use crate::metric::IndexSet;
use crate::stochlab::RngStream;

/// `C(n, m)` in floating point.
pub fn binomial(n: usize, m: usize) -> f64 {
    (0..m.min(n - m)).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Packing set `T(m, n)`: every 0/1 vector in `ℝⁿ` with exactly `m` ones, in lexicographic order of
/// the support. `|T| = C(n, m) ≥ (n/m)^m`.
pub fn packing_set(m: usize, n: usize) -> Result<IndexSet> {
    if m == 0 || m > n {
        return domain(format!("packing set needs 1 <= m <= n, got m={m}, n={n}"));
    }
    let points = (0..n)
        .combinations(m)
        .map(|support| {
            let mut v = vec![0.0; n];
            support.iter().for_each(|&i| v[i] = 1.0);
            v
        })
        .collect();
    IndexSet::new(n, points)
}

/// `{(t¹₁, t²₁, t¹₂, t²₂, …) : t¹, t² ∈ T}` in dimension `2n`; pair `(a, b)` lands at index `a·|T| + b`.
pub fn interleave(set: &IndexSet) -> IndexSet {
    let n = set.dim();
    let points: Vec<Vec<f64>> = set
        .points()
        .iter()
        .cartesian_product(set.points())
        .map(|(a, b)| a.iter().zip(b).flat_map(|(x, y)| [*x, *y]).collect())
        .collect();
    IndexSet::new(2 * n, points).expect("interleaved points have dimension 2n")
}

/// `count` points drawn uniformly from the unit sphere of `ℝⁿ`.
pub fn sphere_random(n: usize, count: usize, stream: RngStream) -> Result<IndexSet> {
    if n == 0 {
        return domain("sphere dimension must be positive");
    }
    let mut rng = stream.rng();
    let points = (0..count)
        .map(|_| loop {
            let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if r > 1e-12 {
                break v.into_iter().map(|x| x / r).collect();
            }
        })
        .collect();
    IndexSet::new(n, points)
}
