use rand::Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::metric::{IndexSet, ProcessMetric, ProcessSpec};
use crate::stochlab::{RngStream, SparseRows, Summary, SupTarget, Welford, CHUNK_SIZE, MIN_SAMPLES};

use super::{metric_options, relative_slack};

/// Levels of the empirical quantiles of `sup X` at which tail ratios are evaluated.
pub const QUANTILE_GRID: [f64; 5] = [0.5, 0.75, 0.9, 0.95, 0.99];
/// Argument constants `c` of the tail comparison.
pub const C_GRID: [f64; 5] = [1.0, 1.5, 2.0, 3.0, 4.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub quantile: f64,
    pub u: f64,
    pub c: f64,
    /// `P(sup Y ≥ u)`.
    pub p_y: f64,
    /// `P(sup X ≥ u/c)`.
    pub p_x: f64,
    pub ratio: f64,
}

/// Smallest probability constant that makes `P(sup Y ≥ u) ≤ c_prob·P(sup X ≥ u/c_arg)` hold on the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontierPoint {
    pub c_arg: f64,
    pub c_prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub p_grid: Vec<f64>,
    /// Largest `‖Y_s − Y_t‖_p / ‖X_s − X_t‖_p` over pairs and orders.
    pub max_domination_ratio: f64,
    pub esup_x: Summary,
    pub esup_y: Summary,
    /// `E sup Y / E sup X`; `None` when `E sup X = 0`.
    pub ratio: Option<f64>,
    pub tail_rows: Vec<TailRow>,
    pub frontier: Vec<FrontierPoint>,
}

/// One quantile-coupled draw: each coordinate shares an Exp(1) level and a sign across both processes.
fn coupled_draw<R: Rng + ?Sized>(px: &ProcessSpec, py: &ProcessSpec, rng: &mut R, x: &mut [f64], y: &mut [f64]) {
    for i in 0..x.len() {
        let e: f64 = rng.sample(Exp1);
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        x[i] = sign * px.model(i).abs_from_exponential(e);
        y[i] = sign * py.model(i).abs_from_exponential(e);
    }
}

/// Type-1 empirical quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let k = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[k - 1]
}

/// Empirical `P(S ≥ u)` from sorted data.
fn survival(sorted: &[f64], u: f64) -> f64 {
    let below = sorted.partition_point(|&v| v < u);
    (sorted.len() - below) as f64 / sorted.len() as f64
}

/// Checks `‖Y_s − Y_t‖_p ≤ ‖X_s − X_t‖_p` on `p_grid`, then compares `sup_{s,t}(X_s − X_t)` and
/// `sup_{s,t}(Y_s − Y_t)` under a quantile coupling. Point `i` of `set_y` stands for point `i` of `set_x`.
pub fn comparison_experiment(
    proc_x: &ProcessSpec,
    set_x: &IndexSet,
    proc_y: &ProcessSpec,
    set_y: &IndexSet,
    p_grid: &[f64],
    samples: usize,
    stream: RngStream,
) -> Result<ComparisonReport> {
    if set_x.len() != set_y.len() {
        return domain(format!("index sets differ in size: {} vs {}", set_x.len(), set_y.len()));
    }
    if proc_x.dimension() != proc_y.dimension() {
        return domain("processes must have the same number of coordinates");
    }
    if set_x.is_empty() || samples < MIN_SAMPLES {
        return domain(format!("need a nonempty set and at least {MIN_SAMPLES} samples"));
    }
    let opts = metric_options(stream);
    let mx = ProcessMetric::new(proc_x.clone(), set_x.clone(), opts)?;
    let my = ProcessMetric::new(proc_y.clone(), set_y.clone(), opts)?;
    let n = set_x.len();
    let mut max_domination_ratio = 0.0f64;
    for &p in p_grid {
        let (dx, dy) = (mx.matrix(p)?, my.matrix(p)?);
        for i in 0..n {
            for j in 0..i {
                let (lhs, rhs) = (dy.get(i, j), dx.get(i, j));
                let tol = dy.error(i, j) + dx.error(i, j) + relative_slack(rhs);
                if lhs > rhs + tol {
                    return Err(Error::DominationViolated { s: j, t: i, p, lhs, rhs });
                }
                if rhs > 0.0 {
                    max_domination_ratio = max_domination_ratio.max(lhs / rhs);
                }
            }
        }
    }

    let (rx, ry) = (SparseRows::new(set_x), SparseRows::new(set_y));
    let dim = proc_x.dimension();
    let chunks = samples.div_ceil(CHUNK_SIZE);
    let draws: Vec<Vec<(f64, f64)>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream.child(c as u64).rng();
            let len = CHUNK_SIZE.min(samples - c * CHUNK_SIZE);
            let (mut x, mut y) = (vec![0.0; dim], vec![0.0; dim]);
            let (mut vx, mut vy) = (Vec::with_capacity(n), Vec::with_capacity(n));
            (0..len)
                .map(|_| {
                    coupled_draw(proc_x, proc_y, &mut rng, &mut x, &mut y);
                    rx.values(&x, &mut vx);
                    ry.values(&y, &mut vy);
                    (SupTarget::SupIncrements.apply(&vx), SupTarget::SupIncrements.apply(&vy))
                })
                .collect()
        })
        .collect();
    let (mut wx, mut wy) = (Welford::default(), Welford::default());
    let (mut sx, mut sy) = (Vec::with_capacity(samples), Vec::with_capacity(samples));
    for &(a, b) in draws.iter().flatten() {
        wx.push(a);
        wy.push(b);
        sx.push(a);
        sy.push(b);
    }
    sx.sort_unstable_by(f64::total_cmp);
    sy.sort_unstable_by(f64::total_cmp);
    let (esup_x, esup_y) = (wx.summary(), wy.summary());

    let mut tail_rows = Vec::with_capacity(QUANTILE_GRID.len() * C_GRID.len());
    for &q in &QUANTILE_GRID {
        let u = quantile(&sx, q);
        for &c in &C_GRID {
            let (p_y, p_x) = (survival(&sy, u), survival(&sx, u / c));
            // p_x ≥ P(sup X ≥ u) > 0 for c ≥ 1, since u is an observed value
            tail_rows.push(TailRow { quantile: q, u, c, p_y, p_x, ratio: p_y / p_x });
        }
    }
    let frontier = C_GRID
        .iter()
        .map(|&c| FrontierPoint { c_arg: c, c_prob: tail_rows.iter().filter(|r| r.c == c).map(|r| r.ratio).fold(0.0, f64::max) })
        .collect();
    Ok(ComparisonReport {
        p_grid: p_grid.to_vec(),
        max_domination_ratio,
        ratio: (esup_x.mean > 0.0).then(|| esup_y.mean / esup_x.mean),
        esup_x,
        esup_y,
        tail_rows,
        frontier,
    })
}
