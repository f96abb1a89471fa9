use serde::{Deserialize, Serialize};

use crate::dist::DistributionModel;
use crate::error::{domain, Result};

use super::engine::{run_chunks, Summary};
use super::rng::RngStream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderStatRow {
    pub k: usize,
    pub mean: f64,
    pub stderr: f64,
    /// `(q, 2(n/k)^{1/q}‖X‖_q)`.
    pub bounds: Vec<(f64, f64)>,
}

impl OrderStatRow {
    /// Bounds exceeded by more than `slack` standard errors.
    pub fn violations(&self, slack: f64) -> usize {
        self.bounds.iter().filter(|(_, b)| self.mean > b + slack * self.stderr).count()
    }
}

fn sorted_abs(model: &DistributionModel, n: usize, rng: &mut rand_chacha::ChaCha8Rng, buf: &mut Vec<f64>) {
    buf.clear();
    buf.extend((0..n).map(|_| model.draw(rng).abs()));
    buf.sort_unstable_by(|a, b| b.total_cmp(a));
}

/// Means of `X_k*`, the k-th largest of `|X₁|, …, |Xₙ|`, for i.i.d. draws of `model`.
pub fn order_stat_means(
    model: &DistributionModel,
    n: usize,
    ks: &[usize],
    qs: &[f64],
    samples: usize,
    stream: RngStream,
) -> Result<Vec<OrderStatRow>> {
    if ks.iter().any(|&k| k == 0 || k > n) {
        return domain(format!("order statistic index must lie in 1..={n}"));
    }
    if qs.iter().any(|&q| !(q >= 1.0)) {
        return domain("bound exponents must be >= 1");
    }
    let sums = run_chunks(samples, stream, ks.len(), |rng, out| {
        let mut buf = Vec::with_capacity(n);
        sorted_abs(model, n, rng, &mut buf);
        for (o, &k) in out.iter_mut().zip(ks) {
            *o = buf[k - 1];
        }
    });
    ks.iter()
        .zip(sums)
        .map(|(&k, s)| {
            let bounds = qs
                .iter()
                .map(|&q| Ok((q, 2.0 * (n as f64 / k as f64).powf(1.0 / q) * model.moment(q)?)))
                .collect::<Result<_>>()?;
            Ok(OrderStatRow { k, mean: s.mean, stderr: s.stderr, bounds })
        })
        .collect()
}

/// `E Σ_{k≤m} X_k*` for i.i.d. draws of `model`.
pub fn top_sum_mean(model: &DistributionModel, n: usize, m: usize, samples: usize, stream: RngStream) -> Result<Summary> {
    if m == 0 || m > n {
        return domain(format!("top-sum length must lie in 1..={n}"));
    }
    Ok(run_chunks(samples, stream, 1, |rng, out| {
        let mut buf = Vec::with_capacity(n);
        sorted_abs(model, n, rng, &mut buf);
        out[0] = buf[..m].iter().sum();
    })[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad;
    use crate::special::normal_cdf;

    #[test]
    fn rademacher_order_stats_are_one() {
        let rows = order_stat_means(&DistributionModel::rademacher(), 5, &[1, 3, 5], &[2.0], 1000, RngStream::new(1, 1)).unwrap();
        assert!(rows.iter().all(|r| r.mean == 1.0 && r.stderr == 0.0));
    }

    #[test]
    fn gaussian_max_of_two_abs() {
        let oracle = quad::integrate_to_infinity(
            |t: f64| {
                let c = 2.0 * normal_cdf(t) - 1.0;
                1.0 - c * c
            },
            0.0,
            1.0,
            1e-12,
            1e-14,
        )
        .value;
        let rows = order_stat_means(&DistributionModel::gaussian(), 2, &[1], &[2.0], 200_000, RngStream::new(4, 0)).unwrap();
        assert!((rows[0].mean - oracle).abs() <= 3.0 * rows[0].stderr, "{} vs {oracle}", rows[0].mean);
    }

    #[test]
    fn bound_holds_for_gaussian() {
        let rows = order_stat_means(&DistributionModel::gaussian(), 8, &[2], &[2.0], 50_000, RngStream::new(5, 0)).unwrap();
        assert!((rows[0].bounds[0].1 - 4.0).abs() < 1e-12);
        assert_eq!(rows[0].violations(3.0), 0);
    }

    #[test]
    fn index_out_of_range() {
        assert!(order_stat_means(&DistributionModel::gaussian(), 3, &[4], &[2.0], 100, RngStream::new(0, 0)).is_err());
        assert!(top_sum_mean(&DistributionModel::gaussian(), 3, 0, 100, RngStream::new(0, 0)).is_err());
    }
}
