use serde::{Deserialize, Serialize};

use crate::dist::{check_alpha_regular, require, DistributionModel, DEFAULT_P_GRID};
use crate::error::Result;

use super::constants::{regularity_constants, RegularityConstants};
use super::minorant::{convex_minorant_with, MinorantOptions};
use super::tail::{log_grid, TailFunction};

/// Envelope grids reach this multiple of `κ³ t0`, far enough for the surrogate checks at `2·100·t_α`.
const HORIZON_FACTOR: f64 = 1000.0;
const SANDWICH_SLACK: f64 = 1e-8;

/// Convex `M` with `M = 0` on `[0, T_α]` and `M(t) ≤ N(t) ≤ M(L_α t)` for `t ≥ T_α`.
///
/// Built as the convex minorant of the model's tail exponent with `c = κ_α`, `t0 = 1 − 1/e`.
/// The model must pass the `R_α` check on the default moment grid.
pub fn log_concave_envelope(model: &DistributionModel, alpha: f64) -> Result<TailFunction<f64>> {
    require(check_alpha_regular(model, alpha, &DEFAULT_P_GRID)?)?;
    let k = regularity_constants(alpha)?;
    envelope_for(model, &k)
}

pub(crate) fn envelope_for(model: &DistributionModel, k: &RegularityConstants<f64>) -> Result<TailFunction<f64>> {
    let opts = MinorantOptions { points_per_decade: 4096, horizon: Some(HORIZON_FACTOR * k.kappa * k.kappa * k.threshold) };
    convex_minorant_with(&model.tail_function(), k.kappa, k.t0, opts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichRow {
    pub t: f64,
    pub n: f64,
    pub m: f64,
    pub m_stretched: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub constants: RegularityConstants<f64>,
    pub rows: Vec<SandwichRow>,
    /// Grid points where `M(t) ≤ N(t) ≤ M(L_α t)` fails beyond the relative slack.
    pub violations: usize,
    /// Grid triples where `M` lies above its chord.
    pub convexity_violations: usize,
    pub m_at_threshold: f64,
}

impl SandwichReport {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.convexity_violations == 0 && self.m_at_threshold == 0.0
    }
}

fn le_with_slack(a: f64, b: f64) -> bool {
    a <= b || a <= b + SANDWICH_SLACK * b.abs().max(1.0)
}

/// Tabulates the envelope sandwich on a log grid over `[T_α, 100·T_α]`.
pub fn envelope_sandwich(model: &DistributionModel, alpha: f64, points: usize) -> Result<SandwichReport> {
    let k = regularity_constants(alpha)?;
    let m = log_concave_envelope(model, alpha)?;
    let grid = log_grid(k.threshold, 100.0 * k.threshold, points.max(3));
    let mut rows = Vec::with_capacity(grid.len());
    let mut violations = 0;
    for &t in &grid {
        let row = SandwichRow { t, n: model.tail_value(t)?, m: m.value(t), m_stretched: m.value(k.dilation * t) };
        if !(le_with_slack(row.m, row.n) && le_with_slack(row.n, row.m_stretched)) {
            violations += 1;
        }
        rows.push(row);
    }
    let convexity_violations = convexity_violations(&m, &grid);
    Ok(SandwichReport { constants: k, rows, violations, convexity_violations, m_at_threshold: m.value(k.threshold) })
}

/// Counts consecutive grid triples where `M((a+c)/2) > (M(a)+M(c))/2` beyond a relative slack.
pub fn convexity_violations(m: &TailFunction<f64>, grid: &[f64]) -> usize {
    grid.windows(3)
        .filter(|w| {
            let (a, c) = (m.value(w[0]), m.value(w[2]));
            let mid = m.value(0.5 * (w[0] + w[2]));
            let chord = 0.5 * (a + c);
            chord.is_finite() && !le_with_slack(mid, chord)
        })
        .count()
}
