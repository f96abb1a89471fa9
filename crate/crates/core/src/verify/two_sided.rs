use std::cell::Cell;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::gamma::{compute_gamma, uniform_space_gamma, Functional, GammaMode, PartitionTree, EXACT_MAX_POINTS};
use crate::metric::{IncrementMetric, IndexSet, ProcessMetric, ProcessSpec, MATRIX_POINT_LIMIT};
use crate::stochlab::{estimate_sup, RngStream, SupTarget, SupremumEstimate};

use super::metric_options;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoSidedReport {
    pub cardinality: usize,
    pub gamma_upper_cert: f64,
    pub certificate_mode: GammaMode,
    pub certificate: PartitionTree,
    /// Exact γ_X when `|T| ≤ 10` and every distance is deterministic.
    pub gamma_exact: Option<f64>,
    /// Analytic value when every order's distances are constant off the diagonal.
    pub gamma_uniform: Option<f64>,
    /// The tightest available value: exact, then uniform, then the certificate.
    pub gamma: f64,
    pub esup: SupremumEstimate,
    /// `esup / γ`; `None` when both vanish.
    pub ratio_upper: Option<f64>,
    /// `γ / esup`; `None` when both vanish.
    pub ratio_lower: Option<f64>,
    pub degenerate: bool,
}

/// The common off-diagonal distance at order `p`, if there is one.
fn uniform_distance(metric: &ProcessMetric, p: u32) -> Option<f64> {
    let n = metric.len();
    if !(2..=MATRIX_POINT_LIMIT).contains(&n) {
        return None;
    }
    let m = metric.matrix(p as f64).ok()?;
    let d = m.get(1, 0);
    let tol = 1e-12 * d.abs().max(1.0);
    let uniform = (0..n).all(|i| (0..i).all(|j| (m.get(i, j) - d).abs() <= tol && m.error(i, j) == 0.0));
    uniform.then_some(d)
}

/// γ_X of a set on which every `d_p` is constant off the diagonal.
pub fn uniform_gamma(metric: &ProcessMetric) -> Option<f64> {
    let ok = Cell::new(true);
    let g = uniform_space_gamma(metric.len(), |p| {
        uniform_distance(metric, p).unwrap_or_else(|| {
            ok.set(false);
            0.0
        })
    })
    .ok()?;
    ok.get().then_some(g)
}

/// γ_X (certificate, and exact when small enough) next to `E sup_{s,t}(X_s − X_t)`.
///
/// `mode = Exact` insists on exhaustive search; `Greedy` certifies with farthest-point splitting and
/// still adds the exact value when the set is small and the metric deterministic.
pub fn two_sided_experiment(
    proc: &ProcessSpec,
    set: &IndexSet,
    samples: usize,
    stream: RngStream,
    mode: GammaMode,
) -> Result<TwoSidedReport> {
    if set.is_empty() {
        return domain("index set is empty");
    }
    let metric = ProcessMetric::new(proc.clone(), set.clone(), metric_options(stream))?;
    let cert = compute_gamma(&metric, Functional::GammaX, mode)?;
    let gamma_exact = match mode {
        GammaMode::Exact => Some(cert.value),
        GammaMode::Greedy if set.len() <= EXACT_MAX_POINTS && metric.is_deterministic() => {
            Some(compute_gamma(&metric, Functional::GammaX, GammaMode::Exact)?.value)
        }
        GammaMode::Greedy => None,
    };
    let gamma_uniform = uniform_gamma(&metric);
    let gamma = gamma_exact.or(gamma_uniform).unwrap_or(cert.value);
    let esup = estimate_sup(proc, set, samples, stream, SupTarget::SupIncrements)?;
    let degenerate = gamma == 0.0 && esup.mean == 0.0;
    let ratio = |a: f64, b: f64| if degenerate { None } else { Some(a / b) };
    Ok(TwoSidedReport {
        cardinality: set.len(),
        gamma_upper_cert: cert.value,
        certificate_mode: mode,
        certificate: cert.certificate,
        gamma_exact,
        gamma_uniform,
        gamma,
        ratio_upper: ratio(esup.mean, gamma),
        ratio_lower: ratio(gamma, esup.mean),
        esup,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::DistributionModel;

    #[test]
    fn singleton_is_degenerate() {
        let proc = ProcessSpec::iid(DistributionModel::gaussian(), 2);
        let set = IndexSet::new(2, vec![vec![1.0, 0.5]]).unwrap();
        let r = two_sided_experiment(&proc, &set, 1000, RngStream::new(1, 0), GammaMode::Greedy).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.ratio_upper, None);
        assert_eq!(r.gamma, 0.0);
    }

    #[test]
    fn exact_not_above_certificate() {
        let proc = ProcessSpec::iid(DistributionModel::gaussian(), 3);
        let set = crate::verify::sphere_random(3, 6, RngStream::new(9, 9)).unwrap();
        let r = two_sided_experiment(&proc, &set, 5000, RngStream::new(2, 0), GammaMode::Greedy).unwrap();
        assert!(r.gamma_exact.unwrap() <= r.gamma_upper_cert + 1e-12);
        assert_eq!(r.gamma_uniform, None);
    }
}
