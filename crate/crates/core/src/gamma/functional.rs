use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::IncrementMetric;
use crate::scalar::{lit, Real};

use super::tree::{block_cap, PartitionTree};

/// Largest set handled by exact enumeration.
pub const EXACT_MAX_POINTS: usize = 10;
/// Largest set accepted by the greedy search.
pub const GREEDY_MAX_POINTS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Functional {
    /// `sup_t Σ_n 2^{n/2} Δ₂(A_n(t))`.
    #[serde(rename = "gamma2")]
    Gamma2,
    /// `sup_t Σ_n Δ_{2^n}(A_n(t))`.
    #[serde(rename = "gammaX")]
    GammaX,
}

impl Functional {
    /// Metric order used at level `n`.
    pub fn order(self, n: usize) -> u32 {
        match self {
            Functional::Gamma2 => 2,
            Functional::GammaX => 1u32.checked_shl(n as u32).unwrap_or(u32::MAX),
        }
    }

    /// Weight of level `n`.
    pub fn weight<F: Real>(self, n: usize) -> F {
        match self {
            Functional::Gamma2 => lit::<F>(2.0).powf(lit::<F>(n as f64 * 0.5)),
            Functional::GammaX => F::one(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaMode {
    Exact,
    Greedy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaResult<F> {
    pub value: F,
    pub certificate: PartitionTree,
    pub mode: GammaMode,
    pub functional: Functional,
}

/// `sup_t Σ_n w_n Δ_{p_n}(A_n(t))` for a validated tree.
pub fn evaluate_certificate<F: Real, M: IncrementMetric<F> + ?Sized>(
    tree: &PartitionTree,
    metric: &M,
    functional: Functional,
) -> Result<F> {
    let points = metric.len();
    tree.validate(points)?;
    let mut level_diams: Vec<Vec<F>> = Vec::with_capacity(tree.depth());
    for (n, level) in tree.levels.iter().enumerate() {
        let w: F = functional.weight(n);
        let d = level
            .iter()
            .map(|b| if b.len() < 2 { Ok(F::zero()) } else { Ok(w * metric.block_diameter(functional.order(n), b)?) })
            .collect::<Result<Vec<F>>>()?;
        level_diams.push(d);
    }
    let chains = tree.chains(points);
    Ok(chains
        .iter()
        .map(|c| c.iter().enumerate().map(|(n, &b)| level_diams[n][b]).fold(F::zero(), |a, x| a + x))
        .fold(F::zero(), F::max))
}

/// γ functional with a certificate: exact enumeration (`|T| ≤ 10`) or greedy farthest-point splitting.
pub fn compute_gamma<F: Real, M: IncrementMetric<F> + ?Sized>(
    metric: &M,
    functional: Functional,
    mode: GammaMode,
) -> Result<GammaResult<F>> {
    let n = metric.len();
    if n == 0 {
        return Err(Error::Domain("γ of an empty set".into()));
    }
    let certificate = match mode {
        GammaMode::Exact => exact_tree(metric, functional)?,
        GammaMode::Greedy => greedy_tree(metric, functional)?,
    };
    let value = evaluate_certificate(&certificate, metric, functional)?;
    Ok(GammaResult { value, certificate, mode, functional })
}

/// Restricted-growth strings of length `n` with at most `max_blocks` blocks, in lexicographic order.
pub(crate) fn restricted_growth_strings(n: usize, max_blocks: usize) -> Vec<Vec<u8>> {
    fn rec(cur: &mut Vec<u8>, n: usize, used: u8, max_blocks: usize, out: &mut Vec<Vec<u8>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        let limit = (used as usize + 1).min(max_blocks) as u8;
        for b in 0..limit {
            cur.push(b);
            rec(cur, n, used.max(b + 1), max_blocks, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    rec(&mut vec![0], n, 1, max_blocks, &mut out);
    out
}

fn blocks_of(rgs: &[u8]) -> Vec<Vec<usize>> {
    let k = rgs.iter().copied().max().map_or(0, |m| m as usize + 1);
    let mut blocks = vec![Vec::new(); k];
    for (i, &b) in rgs.iter().enumerate() {
        blocks[b as usize].push(i);
    }
    blocks
}

fn singletons(n: usize) -> Vec<Vec<usize>> {
    (0..n).map(|i| vec![i]).collect()
}

fn exact_tree<F: Real, M: IncrementMetric<F> + ?Sized>(metric: &M, functional: Functional) -> Result<PartitionTree> {
    let n = metric.len();
    if n > EXACT_MAX_POINTS {
        return Err(Error::Resource(format!("exact γ is limited to {EXACT_MAX_POINTS} points ({n} given); use greedy mode")));
    }
    if !metric.is_deterministic() {
        return Err(Error::NonDeterministicMetric("exact γ needs closed-form, enumerated or quadrature distances".into()));
    }
    if n == 1 {
        return Ok(PartitionTree::trivial(1));
    }
    // level 2 has N_2 = 16 ≥ |T| blocks, so singletons there are optimal; only level 1 is searched
    let p1 = functional.order(1);
    let mut d1 = vec![F::zero(); n * n];
    for i in 0..n {
        for j in 0..i {
            let d = metric.distance(p1, i, j)?;
            d1[i * n + j] = d;
            d1[j * n + i] = d;
        }
    }
    let candidates = restricted_growth_strings(n, block_cap(1));
    let cost = |rgs: &Vec<u8>| -> F {
        let mut worst = F::zero();
        for i in 0..n {
            for j in 0..i {
                if rgs[i] == rgs[j] {
                    worst = worst.max(d1[i * n + j]);
                }
            }
        }
        worst
    };
    let (_, best) = candidates
        .par_iter()
        .enumerate()
        .map(|(rank, rgs)| (cost(rgs), rank))
        .reduce(|| (F::infinity(), usize::MAX), |a, b| if b.0 < a.0 || (b.0 == a.0 && b.1 < a.1) { b } else { a });
    let level1 = blocks_of(&candidates[best]);
    let mut levels = vec![vec![(0..n).collect()], level1.clone()];
    if level1.iter().any(|b| b.len() > 1) {
        levels.push(singletons(n));
    }
    Ok(PartitionTree { levels })
}

/// Splits `pieces` among blocks: one each, the rest in proportion to diameter (largest remainder).
fn allocate<F: Real>(diams: &[F], sizes: &[usize], budget: usize) -> Vec<usize> {
    let mut alloc: Vec<usize> = sizes.iter().map(|_| 1).collect();
    let mut left = budget.saturating_sub(alloc.len());
    let total: F = diams.iter().fold(F::zero(), |a, &d| a + d);
    if left == 0 || total <= F::zero() {
        return alloc;
    }
    let spare = lit::<F>(left as f64);
    let mut remainders: Vec<(F, usize)> = Vec::with_capacity(diams.len());
    for (i, &d) in diams.iter().enumerate() {
        let share = spare * d / total;
        let whole = share.floor().to_usize().unwrap_or(0).min(sizes[i] - alloc[i]).min(left);
        alloc[i] += whole;
        left -= whole;
        remainders.push((share - share.floor(), i));
    }
    // leftovers go to the largest deficits first, then to any block that can still split
    remainders.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal).then(a.1.cmp(&b.1)));
    let mut order: Vec<usize> = remainders.iter().map(|r| r.1).collect();
    let mut by_diam: Vec<usize> = (0..diams.len()).collect();
    by_diam.sort_by(|&a, &b| diams[b].partial_cmp(&diams[a]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b)));
    order.extend(by_diam);
    while left > 0 {
        let mut progressed = false;
        for &i in &order {
            if left == 0 {
                break;
            }
            if alloc[i] < sizes[i] && diams[i] > F::zero() {
                alloc[i] += 1;
                left -= 1;
                progressed = true;
            }
        }
        if !progressed {
            break;
        }
    }
    alloc
}

/// Farthest-point split of `block` into at most `k` cells; centers start at the lowest index.
fn farthest_point_split<F: Real, M: IncrementMetric<F> + ?Sized>(
    metric: &M,
    p: u32,
    block: &[usize],
    k: usize,
) -> Result<Vec<Vec<usize>>> {
    let mut sorted = block.to_vec();
    sorted.sort_unstable();
    if k <= 1 || sorted.len() <= 1 {
        return Ok(vec![sorted]);
    }
    let mut centers = vec![sorted[0]];
    let mut nearest = vec![0usize; sorted.len()];
    let mut gap: Vec<F> = sorted.iter().map(|&i| metric.distance(p, i, sorted[0])).collect::<Result<_>>()?;
    while centers.len() < k {
        let mut far = 0;
        for (idx, &g) in gap.iter().enumerate() {
            if g > gap[far] {
                far = idx;
            }
        }
        if gap[far] <= F::zero() {
            break;
        }
        let c = sorted[far];
        let ci = centers.len();
        centers.push(c);
        for (idx, &i) in sorted.iter().enumerate() {
            let d = metric.distance(p, i, c)?;
            if d < gap[idx] {
                gap[idx] = d;
                nearest[idx] = ci;
            }
        }
    }
    let mut cells = vec![Vec::new(); centers.len()];
    for (idx, &i) in sorted.iter().enumerate() {
        cells[nearest[idx]].push(i);
    }
    Ok(cells)
}

fn greedy_tree<F: Real, M: IncrementMetric<F> + ?Sized>(metric: &M, functional: Functional) -> Result<PartitionTree> {
    let n = metric.len();
    if n > GREEDY_MAX_POINTS {
        return Err(Error::Resource(format!("greedy γ is limited to {GREEDY_MAX_POINTS} points ({n} given)")));
    }
    let mut levels: Vec<Vec<Vec<usize>>> = vec![vec![(0..n).collect()]];
    loop {
        let current = levels.last().expect("nonempty");
        if current.iter().all(|b| b.len() == 1) {
            break;
        }
        let next_level = levels.len();
        let cap = block_cap(next_level);
        if cap >= n {
            levels.push(singletons(n));
            continue;
        }
        let p = functional.order(next_level);
        let diams: Vec<F> = current.iter().map(|b| metric.block_diameter(p, b)).collect::<Result<_>>()?;
        let sizes: Vec<usize> = current.iter().map(|b| b.len()).collect();
        let alloc = allocate(&diams, &sizes, cap);
        let mut next = Vec::new();
        for (b, block) in current.iter().enumerate() {
            next.extend(farthest_point_split(metric, p, block, alloc[b])?);
        }
        if next.len() == current.len() {
            // every block is a cloud of coincident points; separate them directly
            levels.push(singletons(n));
            continue;
        }
        levels.push(next);
    }
    if levels.len() == 1 && n > 1 {
        levels.push(singletons(n));
    }
    Ok(PartitionTree { levels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::DistributionModel;
    use crate::metric::{DistanceMatrix, IndexSet, MatrixMetric, NormOptions, ProcessMetric, ProcessSpec};
    use approx::assert_relative_eq;

    fn two_point_gaussian() -> ProcessMetric {
        let proc = ProcessSpec::iid(DistributionModel::gaussian(), 1);
        ProcessMetric::new(proc, IndexSet::new(1, vec![vec![0.0], vec![1.0]]).unwrap(), NormOptions::default()).unwrap()
    }

    #[test]
    fn rgs_counts() {
        // Stirling numbers S(10,1..4) sum to 43947
        assert_eq!(restricted_growth_strings(10, 4).len(), 43947);
        assert_eq!(restricted_growth_strings(3, 4).len(), 5);
    }

    #[test]
    fn singleton_is_zero() {
        let proc = ProcessSpec::iid(DistributionModel::gaussian(), 2);
        let m = ProcessMetric::new(proc, IndexSet::new(2, vec![vec![1.0, 1.0]]).unwrap(), NormOptions::default()).unwrap();
        for mode in [GammaMode::Exact, GammaMode::Greedy] {
            let r = compute_gamma(&m, Functional::GammaX, mode).unwrap();
            assert_eq!(r.value, 0.0);
            assert_eq!(r.certificate, PartitionTree::trivial(1));
        }
    }

    #[test]
    fn two_point_identities() {
        let m = two_point_gaussian();
        let g2 = compute_gamma(&m, Functional::Gamma2, GammaMode::Exact).unwrap();
        assert_relative_eq!(g2.value, 1.0, max_relative = 1e-12);
        let gx = compute_gamma(&m, Functional::GammaX, GammaMode::Exact).unwrap();
        assert_relative_eq!(gx.value, (2.0 / std::f64::consts::PI).sqrt(), max_relative = 1e-12);
        let greedy = compute_gamma(&m, Functional::GammaX, GammaMode::Greedy).unwrap();
        assert_relative_eq!(greedy.value, gx.value, max_relative = 1e-12);
    }

    #[test]
    fn exact_rejects_large_sets() {
        let proc = ProcessSpec::iid(DistributionModel::gaussian(), 11);
        let m = ProcessMetric::new(proc, IndexSet::basis(11).unwrap(), NormOptions::default()).unwrap();
        assert!(matches!(compute_gamma(&m, Functional::GammaX, GammaMode::Exact), Err(Error::Resource(_))));
    }

    #[test]
    fn exact_rejects_sampled_metrics() {
        let proc = ProcessSpec::iid(DistributionModel::sym_weibull(1.5).unwrap(), 2);
        let m = ProcessMetric::new(proc, IndexSet::basis(2).unwrap(), NormOptions::default()).unwrap();
        assert!(matches!(compute_gamma(&m, Functional::GammaX, GammaMode::Exact), Err(Error::NonDeterministicMetric(_))));
    }

    #[test]
    fn evaluate_rejects_bad_tree() {
        let m = two_point_gaussian();
        let bad = PartitionTree { levels: vec![vec![vec![0, 1]]] };
        assert!(matches!(evaluate_certificate(&bad, &m, Functional::GammaX), Err(Error::InvalidTree { level: 0, .. })));
    }

    #[test]
    fn greedy_respects_caps_on_uniform_space() {
        let n = 300;
        let mut vals = vec![1.0f32; n * n];
        for i in 0..n {
            vals[i * n + i] = 0.0;
        }
        let metric = MatrixMetric::uniform_in_p(DistanceMatrix::from_values(1.0, n, vals).unwrap());
        let r = compute_gamma(&metric, Functional::GammaX, GammaMode::Greedy).unwrap();
        r.certificate.validate(n).unwrap();
        // N_3 = 256 < 300, so levels 0..=3 each contribute 1
        assert!((r.value - 4.0).abs() < 1e-6);
    }
}
