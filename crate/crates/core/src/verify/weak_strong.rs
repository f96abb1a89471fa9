use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::metric::{coefficient_norm, IndexSet, ProcessSpec};
use crate::stochlab::{process_statistics, RngStream, Summary, SupTarget};

use super::metric_options;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakStrongReport {
    pub p: f64,
    /// `E sup_t |X_t|^p`.
    pub strong_moment: Summary,
    /// `(E sup_t |X_t|^p)^{1/p}`.
    pub strong: f64,
    /// `E sup_t |X_t|`.
    pub weak_sup: Summary,
    /// `sup_t ‖X_t‖_p`.
    pub max_norm: f64,
    pub max_norm_error: f64,
    /// `strong / (weak_sup + max_norm)`.
    pub c_obs: f64,
    /// Delta-method standard error of `c_obs` from the two Monte Carlo terms.
    pub c_obs_stderr: f64,
}

/// Weak and strong moments of `sup_t |X_t|`.
pub fn weak_strong_experiment(
    proc: &ProcessSpec,
    set: &IndexSet,
    p: f64,
    samples: usize,
    stream: RngStream,
) -> Result<WeakStrongReport> {
    if !(p >= 1.0) || !p.is_finite() {
        return domain(format!("order must be finite and >= 1, got {p}"));
    }
    let s = process_statistics(proc, set, samples, stream, 2, |v, out| {
        let m = SupTarget::SupAbs.apply(v);
        out[0] = m.powf(p);
        out[1] = m;
    })?;
    let opts = metric_options(stream);
    let (mut max_norm, mut max_norm_error) = (0.0f64, 0.0f64);
    for t in set.points() {
        let r = coefficient_norm(proc, t, p, &opts)?;
        if r.value > max_norm {
            max_norm = r.value;
        }
        max_norm_error = max_norm_error.max(r.error_bound);
    }
    let (moment, weak) = (s[0], s[1]);
    let strong = moment.mean.powf(1.0 / p);
    let denom = weak.mean + max_norm;
    let c_obs = if denom > 0.0 { strong / denom } else { 0.0 };
    let d_strong = if moment.mean > 0.0 { strong / (p * moment.mean) * moment.stderr } else { 0.0 };
    let c_obs_stderr = if denom > 0.0 { (d_strong / denom).hypot(c_obs * weak.stderr / denom) } else { 0.0 };
    Ok(WeakStrongReport { p, strong_moment: moment, strong, weak_sup: weak, max_norm, max_norm_error, c_obs, c_obs_stderr })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::DistributionModel;

    #[test]
    fn rademacher_basis_is_half() {
        let proc = ProcessSpec::iid(DistributionModel::rademacher(), 8);
        let r = weak_strong_experiment(&proc, &IndexSet::basis(8).unwrap(), 8.0, 1000, RngStream::new(1, 0)).unwrap();
        assert_eq!(r.strong, 1.0);
        assert_eq!(r.weak_sup.mean, 1.0);
        assert!((r.max_norm - 1.0).abs() < 1e-12);
        assert!((r.c_obs - 0.5).abs() < 1e-12);
    }

    #[test]
    fn singleton_is_at_most_one() {
        let proc = ProcessSpec::iid(DistributionModel::gaussian(), 2);
        let set = IndexSet::new(2, vec![vec![0.6, 0.8]]).unwrap();
        let r = weak_strong_experiment(&proc, &set, 4.0, 100_000, RngStream::new(2, 0)).unwrap();
        let norm4 = 3f64.powf(0.25);
        assert!((r.max_norm - norm4).abs() < 1e-12);
        assert!((r.strong - norm4).abs() < 0.02);
        assert!(r.c_obs <= 1.0);
    }
}
