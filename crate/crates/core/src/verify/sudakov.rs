use serde::{Deserialize, Serialize};

use crate::dist::DistributionModel;
use crate::error::{domain, Result};
use crate::gamma::{block_cap, compute_gamma, Functional, GammaMode, PartitionTree, EXACT_MAX_POINTS};
use crate::metric::{IncrementMetric, IndexSet, NormOptions, ProcessMetric, ProcessSpec};
use crate::stochlab::{
    estimate_sup, order_stat_means, run_chunks, OrderStatRow, RngStream, SparseRows, Summary, SupTarget, SupremumEstimate,
};

use super::sets::{interleave, packing_set};
use super::{metric_options, relative_slack};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OffendingPair {
    pub s: usize,
    pub t: usize,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SudakovReport {
    pub p: f64,
    /// Claimed separation.
    pub u: f64,
    pub cardinality: usize,
    /// `|T| ≥ e^p`.
    pub cardinality_ok: bool,
    pub min_observed_separation: f64,
    /// Largest metric error bound among the pairs.
    pub separation_tolerance: f64,
    pub separation_ok: bool,
    /// Closest pair when the separation claim fails.
    pub offending_pair: Option<OffendingPair>,
    pub esup: SupremumEstimate,
    /// `esup.mean / u`.
    pub kappa_obs: f64,
    pub kappa_stderr: f64,
}

impl SudakovReport {
    pub fn passed(&self) -> bool {
        self.cardinality_ok && self.separation_ok
    }

    /// `κ_obs ≥ floor` allowing `slack` standard errors.
    pub fn meets_floor(&self, floor: f64, slack: f64) -> bool {
        self.kappa_obs + slack * self.kappa_stderr >= floor
    }
}

/// Minimum pairwise `d_p` over `metric`'s set, with the closest pair and the largest error bound.
pub(crate) fn min_separation(metric: &ProcessMetric, p: f64) -> Result<(f64, (usize, usize), f64)> {
    let m = metric.matrix(p)?;
    let n = metric.index_set().len();
    let mut best = (f64::INFINITY, (0, 0));
    let mut tol = 0.0f64;
    for i in 0..n {
        for j in 0..i {
            let d = m.get(i, j);
            tol = tol.max(m.error(i, j));
            if d < best.0 {
                best = (d, (j, i));
            }
        }
    }
    Ok((best.0, best.1, tol))
}

/// Sudakov minoration harness: checks `|T| ≥ e^p` and pairwise `d_p ≥ u`, then estimates
/// `E sup_{s,t}(X_s − X_t)` and `κ_obs = E sup / u`.
pub fn sudakov_experiment(
    proc: &ProcessSpec,
    set: &IndexSet,
    p: f64,
    u: f64,
    samples: usize,
    stream: RngStream,
) -> Result<SudakovReport> {
    if set.len() < 2 {
        return domain("Sudakov experiment needs at least two points");
    }
    if !(u > 0.0) || !u.is_finite() {
        return domain(format!("separation must be positive and finite, got {u}"));
    }
    let metric = ProcessMetric::new(proc.clone(), set.clone(), metric_options(stream))?;
    let (min_sep, (s, t), err) = min_separation(&metric, p)?;
    let separation_tolerance = err + relative_slack(u);
    let separation_ok = min_sep >= u - separation_tolerance;
    let esup = estimate_sup(proc, set, samples, stream, SupTarget::SupIncrements)?;
    Ok(SudakovReport {
        p,
        u,
        cardinality: set.len(),
        cardinality_ok: (set.len() as f64).ln() >= p,
        min_observed_separation: min_sep,
        separation_tolerance,
        separation_ok,
        offending_pair: (!separation_ok).then_some(OffendingPair { s, t, distance: min_sep }),
        esup,
        kappa_obs: esup.mean / u,
        kappa_stderr: esup.stderr / u,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PackingChainReport {
    pub m: usize,
    pub n: usize,
    /// `E sup_{s,t ∈ T(m,n)} (X_s − X_t)`.
    pub esup: Summary,
    /// `2·E Σ_{k≤m} X_k*`.
    pub twice_top_sum: Summary,
    /// Paired difference `sup − 2Σ_{k≤m} X_k*` on the same draws.
    pub gap: Summary,
    pub chain_ok: bool,
    pub order_stats: Vec<OrderStatRow>,
    pub order_violations: usize,
}

impl PackingChainReport {
    pub fn passed(&self) -> bool {
        self.chain_ok && self.order_violations == 0
    }
}

/// Packing-set chain `E sup ≤ 2·E Σ_{k≤m} X_k*` for i.i.d. coordinates, together with the
/// order-statistic bounds `E X_k* ≤ 2(n/k)^{1/q}‖X‖_q` for `q ∈ qs`.
pub fn packing_chain_check(
    model: &DistributionModel,
    m: usize,
    n: usize,
    qs: &[f64],
    samples: usize,
    stream: RngStream,
) -> Result<PackingChainReport> {
    let set = packing_set(m, n)?;
    let rows = SparseRows::new(&set);
    let stats = run_chunks(samples, stream, 3, |rng, out| {
        let x: Vec<f64> = (0..n).map(|_| model.draw(rng)).collect();
        let mut values = Vec::with_capacity(rows.len());
        rows.values(&x, &mut values);
        let sup = SupTarget::SupIncrements.apply(&values);
        let mut abs: Vec<f64> = x.iter().map(|v| v.abs()).collect();
        abs.sort_unstable_by(|a, b| b.total_cmp(a));
        let top = 2.0 * abs[..m].iter().sum::<f64>();
        out[0] = sup;
        out[1] = top;
        out[2] = sup - top;
    });
    let ks: Vec<usize> = (1..=n).collect();
    let order_stats = order_stat_means(model, n, &ks, qs, samples, stream.child(1))?;
    let order_violations = order_stats.iter().map(|r| r.violations(3.0)).sum();
    Ok(PackingChainReport {
        m,
        n,
        esup: stats[0],
        twice_top_sum: stats[1],
        gap: stats[2],
        chain_ok: stats[2].mean <= 3.0 * stats[2].stderr,
        order_stats,
        order_violations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterleaveChainReport {
    pub p: f64,
    pub u: f64,
    /// `ℓ = ⌈log₂ p⌉`, so that `2^ℓ ≥ p`.
    pub level: usize,
    pub cardinality: usize,
    /// `N_ℓ`.
    pub cap: usize,
    /// `|T̃| > N_ℓ`, which forces a level-ℓ block with two points.
    pub cardinality_ok: bool,
    pub min_separation: f64,
    pub min_separation_tilde: f64,
    pub separation_preserved: bool,
    pub block: Vec<usize>,
    /// `Δ_{2^ℓ}(A)` for the chosen block.
    pub block_diameter: f64,
    pub gamma_tilde: f64,
    pub gamma_mode: GammaMode,
    pub certificate: PartitionTree,
    pub chain_ok: bool,
}

impl InterleaveChainReport {
    pub fn passed(&self) -> bool {
        self.cardinality_ok && self.separation_preserved && self.chain_ok
    }
}

/// Interleaving reduction: builds `T̃`, computes a γ_X certificate on it (exact when it has at most
/// ten points) and checks `u ≤ Δ_{2^ℓ}(A) ≤ γ_X(T̃)` for a level-ℓ block `A` with two points.
pub fn interleave_chain_check(
    proc: &ProcessSpec,
    set: &IndexSet,
    p: f64,
    u: f64,
    stream: RngStream,
) -> Result<InterleaveChainReport> {
    if !(p >= 1.0) || !p.is_finite() {
        return domain(format!("order must be finite and >= 1, got {p}"));
    }
    if set.len() < 2 {
        return domain("interleaving needs at least two points");
    }
    let tilde = interleave(set);
    let models = proc.models().iter().flat_map(|m| [m.clone(), m.clone()]).collect();
    let tproc = ProcessSpec::new(models)?;
    let opts: NormOptions = metric_options(stream);
    let base = ProcessMetric::new(proc.clone(), set.clone(), opts)?;
    let metric = ProcessMetric::new(tproc, tilde.clone(), opts)?;
    let (min_sep, _, err) = min_separation(&base, p)?;
    let (min_sep_tilde, _, err_tilde) = min_separation(&metric, p)?;
    let separation_preserved = min_sep_tilde >= min_sep - err - err_tilde - relative_slack(min_sep);

    let level = p.log2().ceil().max(0.0) as usize;
    let cap = block_cap(level);
    let mode = if tilde.len() <= EXACT_MAX_POINTS { GammaMode::Exact } else { GammaMode::Greedy };
    let g = compute_gamma(&metric, Functional::GammaX, mode)?;
    let order = Functional::GammaX.order(level);
    let block = g.certificate.levels.get(level).and_then(|l| l.iter().find(|b| b.len() >= 2)).cloned().unwrap_or_default();
    let block_diameter = if block.len() >= 2 { metric.block_diameter(order, &block)? } else { 0.0 };
    let tol = err_tilde + relative_slack(g.value);
    let chain_ok = block.len() >= 2 && u <= block_diameter + tol && block_diameter <= g.value + tol;
    Ok(InterleaveChainReport {
        p,
        u,
        level,
        cardinality: tilde.len(),
        cap,
        cardinality_ok: tilde.len() > cap,
        min_separation: min_sep,
        min_separation_tilde: min_sep_tilde,
        separation_preserved,
        block,
        block_diameter,
        gamma_tilde: g.value,
        gamma_mode: mode,
        certificate: g.certificate,
        chain_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::normal_cdf;

    #[test]
    fn gaussian_basis_separation_is_exact() {
        let proc = ProcessSpec::iid(DistributionModel::gaussian(), 8);
        let set = IndexSet::basis(8).unwrap();
        let r = sudakov_experiment(&proc, &set, 2.0, 2f64.sqrt(), 20_000, RngStream::new(1, 0)).unwrap();
        assert!((r.min_observed_separation - 2f64.sqrt()).abs() < 1e-12);
        assert!(r.passed());
        assert_eq!(r.kappa_obs, r.esup.mean / r.u);
        // E max of 8 standard normals: ∫ (1 − Φ^8) − ∫ Φ^8 over the two half-lines.
        let upper = crate::quad::integrate_to_infinity(|t: f64| 1.0 - normal_cdf(t).powi(8), 0.0, 1.0, 1e-12, 1e-14).value;
        let lower = crate::quad::integrate_to_infinity(|t: f64| normal_cdf(-t).powi(8), 0.0, 1.0, 1e-12, 1e-14).value;
        let kappa = 2.0 * (upper - lower) / 2f64.sqrt();
        assert!((r.kappa_obs - kappa).abs() <= 3.0 * r.kappa_stderr, "{} vs {kappa}", r.kappa_obs);
    }

    #[test]
    fn half_normal_pair() {
        let proc = ProcessSpec::iid(DistributionModel::gaussian(), 1);
        let set = IndexSet::new(1, vec![vec![0.0], vec![1.0]]).unwrap();
        let r = sudakov_experiment(&proc, &set, 2.0, 1.0, 50_000, RngStream::new(2, 0)).unwrap();
        assert!((r.kappa_obs - 0.797_884_560_802_865_4).abs() <= 3.0 * r.kappa_stderr);
        assert!(!r.cardinality_ok);
    }

    #[test]
    fn false_claim_names_the_pair() {
        let proc = ProcessSpec::iid(DistributionModel::gaussian(), 2);
        let set = IndexSet::new(2, vec![vec![0.0, 0.0], vec![0.1, 0.0], vec![5.0, 0.0]]).unwrap();
        let r = sudakov_experiment(&proc, &set, 1.0, 1.0, 1000, RngStream::new(3, 0)).unwrap();
        assert!(!r.separation_ok);
        let o = r.offending_pair.unwrap();
        assert_eq!((o.s, o.t), (0, 1));
        assert!(r.esup.mean > 0.0);
    }

    #[test]
    fn interleave_chain_on_three_points() {
        let proc = ProcessSpec::iid(DistributionModel::gaussian(), 3);
        let set = IndexSet::basis(3).unwrap();
        let r = interleave_chain_check(&proc, &set, 1.05, 2f64.sqrt() * 0.79, RngStream::new(4, 0)).unwrap();
        assert_eq!(r.level, 1);
        assert_eq!(r.cardinality, 9);
        assert!(r.passed(), "{r:?}");
    }
}
