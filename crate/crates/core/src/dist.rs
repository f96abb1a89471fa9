//! Standardized symmetric coordinate laws: moments, tail exponents, samplers and
//! the moment-growth classifiers for `R_α` (α-regular growth) and `S_β` (speed β).

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::quad;
use crate::special::{gaussian_abs_quantile_from_exponent, gaussian_tail_exponent, ln_gamma};
use crate::stochlab::RngStream;
use crate::tailkit::TailFunction;

/// Default moment grid used by the class checks.
pub const DEFAULT_P_GRID: [f64; 14] = [2.0, 2.5, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0, 24.0, 32.0, 48.0, 64.0, 96.0, 128.0];

/// Largest even order kept in the per-model moment table.
pub const MOMENT_TABLE_ORDER: usize = 128;

/// Relative slack for floating-point ties in the class checks.
const CLASS_TIE_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub enum Family {
    Gaussian,
    Rademacher,
    SymExponential,
    SymWeibull {
        shape: f64,
    },
    /// `P(X = ±a) = 1/(2a²)`, `P(X = 0) = 1 − 1/a²`.
    ThreePoint {
        atom: f64,
    },
    /// `P(|R| > t) = e^{−N(t)}` before rescaling to unit variance.
    LogConcaveFromTail(TailFunction<f64>),
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Gaussian => "gaussian",
            Family::Rademacher => "rademacher",
            Family::SymExponential => "sym_exponential",
            Family::SymWeibull { .. } => "sym_weibull",
            Family::ThreePoint { .. } => "three_point",
            Family::LogConcaveFromTail(_) => "log_concave_from_tail",
        }
    }
}

/// A symmetric law with mean 0 and variance 1.
///
/// The raw family member `R` is multiplied by `scale` so that `E X² = 1`.
/// Immutable once built; clones share the moment table.
#[derive(Clone)]
pub struct DistributionModel {
    family: Family,
    scale: f64,
    /// `E X^{2k}` for `k = 0..=MOMENT_TABLE_ORDER/2`.
    even_moments: Arc<[f64]>,
}

impl fmt::Debug for DistributionModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DistributionModel").field("family", &self.family).field("scale", &self.scale).finish()
    }
}

impl PartialEq for DistributionModel {
    fn eq(&self, other: &Self) -> bool {
        match (&self.family, &other.family) {
            (Family::Gaussian, Family::Gaussian)
            | (Family::Rademacher, Family::Rademacher)
            | (Family::SymExponential, Family::SymExponential) => true,
            (Family::SymWeibull { shape: a }, Family::SymWeibull { shape: b }) => a == b,
            (Family::ThreePoint { atom: a }, Family::ThreePoint { atom: b }) => a == b,
            _ => false,
        }
    }
}

impl DistributionModel {
    fn build(family: Family, scale: f64) -> Self {
        let mut model = Self { family, scale, even_moments: Arc::from(Vec::new()) };
        let table: Vec<f64> = (0..=MOMENT_TABLE_ORDER / 2)
            .map(|k| if k == 0 { 1.0 } else { model.ln_abs_moment_uncached(2.0 * k as f64).exp() })
            .collect();
        model.even_moments = table.into();
        model
    }

    pub fn gaussian() -> Self {
        Self::build(Family::Gaussian, 1.0)
    }

    pub fn rademacher() -> Self {
        Self::build(Family::Rademacher, 1.0)
    }

    /// Laplace law with `P(|X| > t) = e^{−√2 t}`.
    pub fn sym_exponential() -> Self {
        Self::build(Family::SymExponential, 1.0 / SQRT_2)
    }

    /// `|X| = b·W` with `P(W > t) = exp(−t^shape)`.
    pub fn sym_weibull(shape: f64) -> Result<Self> {
        if !(shape > 0.0 && shape.is_finite()) {
            return domain("weibull shape must be positive and finite");
        }
        let scale = (-0.5 * ln_gamma(1.0 + 2.0 / shape)).exp();
        Ok(Self::build(Family::SymWeibull { shape }, scale))
    }

    pub fn three_point(atom: f64) -> Result<Self> {
        if !(atom > 1.0 && atom.is_finite()) {
            return domain("three_point atom must exceed 1");
        }
        Ok(Self::build(Family::ThreePoint { atom }, 1.0))
    }

    /// Symmetric law whose absolute value has tail exponent `tail`, rescaled to unit variance.
    pub fn log_concave_from_tail(tail: TailFunction<f64>) -> Result<Self> {
        if tail.value(0.0) > 0.0 && tail.support_bound() <= 0.0 {
            return domain("tail describes the zero variable");
        }
        let second = ln_moment_from_tail(&tail, 2.0).exp();
        if !(second.is_finite() && second > 0.0) {
            return domain("tail must have a finite positive second moment");
        }
        Ok(Self::build(Family::LogConcaveFromTail(tail), 1.0 / second.sqrt()))
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn name(&self) -> &'static str {
        self.family.name()
    }

    /// Multiplier from the raw family member to the standardized variable.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `ln E|X|^p` for `p > 0`.
    pub fn ln_abs_moment(&self, p: f64) -> f64 {
        if p.fract() == 0.0 && p >= 0.0 && (p as usize).is_multiple_of(2) && (p as usize) <= MOMENT_TABLE_ORDER {
            let m = self.even_moments[p as usize / 2];
            // heavy Weibull shapes overflow the table; fall through to the log route
            if m.is_finite() {
                return m.ln();
            }
        }
        self.ln_abs_moment_uncached(p)
    }

    fn ln_abs_moment_uncached(&self, p: f64) -> f64 {
        let ls = self.scale.ln();
        match &self.family {
            Family::Gaussian => 0.5 * p * 2f64.ln() + ln_gamma(0.5 * (p + 1.0)) - 0.5 * PI.ln(),
            Family::Rademacher => 0.0,
            Family::SymExponential => ln_gamma(p + 1.0) + p * ls,
            Family::SymWeibull { shape } => ln_gamma(1.0 + p / shape) + p * ls,
            Family::ThreePoint { atom } => (p - 2.0) * atom.ln(),
            Family::LogConcaveFromTail(tail) => ln_moment_from_tail(tail, p) + p * ls,
        }
    }

    /// `E X^{2k}` (cached up to order 128).
    pub fn even_moment(&self, k: usize) -> f64 {
        if 2 * k <= MOMENT_TABLE_ORDER {
            self.even_moments[k]
        } else {
            self.ln_abs_moment_uncached(2.0 * k as f64).exp()
        }
    }

    /// `‖X‖_p = (E|X|^p)^{1/p}` for `p ≥ 1`.
    pub fn moment(&self, p: f64) -> Result<f64> {
        if !(p >= 1.0) || !p.is_finite() {
            return domain(format!("moment order must be finite and >= 1, got {p}"));
        }
        let v = (self.ln_abs_moment(p) / p).exp();
        assert!(v.is_finite(), "supported families have all moments");
        Ok(v)
    }

    /// `‖X‖_p` recomputed from the tail exponent by quadrature (cross-check route).
    pub fn moment_by_quadrature(&self, p: f64) -> Result<f64> {
        if !(p >= 1.0) {
            return domain("moment order must be >= 1");
        }
        let tail = self.tail_function();
        Ok((ln_moment_from_tail(&tail, p) / p).exp())
    }

    /// `N(t) = −ln P(|X| > t)`; `+∞` from the essential supremum on.
    pub fn tail_value(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return domain("tail_value needs t >= 0");
        }
        Ok(self.tail_exponent(t))
    }

    pub(crate) fn tail_exponent(&self, t: f64) -> f64 {
        let r = t / self.scale;
        match &self.family {
            Family::Gaussian => gaussian_tail_exponent(t),
            Family::Rademacher => {
                if t < 1.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Family::SymExponential => SQRT_2 * t,
            Family::SymWeibull { shape } => r.powf(*shape),
            Family::ThreePoint { atom } => {
                if t < *atom {
                    2.0 * atom.ln()
                } else {
                    f64::INFINITY
                }
            }
            Family::LogConcaveFromTail(tail) => tail.value(r),
        }
    }

    /// Essential supremum of `|X|` (`∞` for unbounded laws).
    pub fn support_bound(&self) -> f64 {
        match &self.family {
            Family::Rademacher => 1.0,
            Family::ThreePoint { atom } => *atom,
            Family::LogConcaveFromTail(tail) => tail.support_bound() * self.scale,
            _ => f64::INFINITY,
        }
    }

    /// The tail exponent of `|X|` as a [`TailFunction`].
    pub fn tail_function(&self) -> TailFunction<f64> {
        let model = self.clone();
        TailFunction::analytic(move |t| model.tail_exponent(t), self.support_bound())
    }

    /// Finite support as `(value, probability)` pairs, if the law is discrete.
    pub fn atoms(&self) -> Option<Vec<(f64, f64)>> {
        match &self.family {
            Family::Rademacher => Some(vec![(-1.0, 0.5), (1.0, 0.5)]),
            Family::ThreePoint { atom } => {
                let q = 0.5 / (atom * atom);
                Some(vec![(-atom, q), (0.0, 1.0 - 2.0 * q), (*atom, q)])
            }
            _ => None,
        }
    }

    /// `ln φ(u)` of the characteristic function when it is positive and closed-form.
    pub fn ln_char_fn(&self, u: f64) -> Option<f64> {
        match &self.family {
            Family::Gaussian => Some(-0.5 * u * u),
            Family::SymExponential => Some(-(0.5 * u * u).ln_1p()),
            _ => None,
        }
    }

    /// `|X|` as a function of an Exp(1) level `e` (quantile coupling):
    /// `inf {t : N(t) ≥ e}`.
    pub fn abs_from_exponential(&self, e: f64) -> f64 {
        match &self.family {
            Family::Gaussian => gaussian_abs_quantile_from_exponent(e),
            Family::Rademacher => 1.0,
            Family::SymExponential => e / SQRT_2,
            Family::SymWeibull { shape } => self.scale * e.powf(1.0 / shape),
            Family::ThreePoint { atom } => {
                if e <= 2.0 * atom.ln() {
                    0.0
                } else {
                    *atom
                }
            }
            Family::LogConcaveFromTail(tail) => self.scale * tail.inverse(e),
        }
    }

    /// One draw.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.family {
            Family::Gaussian => rng.sample(StandardNormal),
            Family::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            Family::ThreePoint { atom } => {
                let u: f64 = rng.random();
                let q = 1.0 / (atom * atom);
                if u < 0.5 * q {
                    *atom
                } else if u < q {
                    -atom
                } else {
                    0.0
                }
            }
            _ => {
                let e: f64 = rng.sample(Exp1);
                let mag = self.abs_from_exponential(e);
                if rng.random::<bool>() {
                    mag
                } else {
                    -mag
                }
            }
        }
    }

    /// `count` i.i.d. draws from `stream`.
    pub fn sample(&self, stream: RngStream, count: usize) -> Vec<f64> {
        let mut rng = stream.rng();
        (0..count).map(|_| self.draw(&mut rng)).collect()
    }
}

/// `ln ∫₀^∞ p t^{p−1} e^{−N(t)} dt`, evaluated with a log-shift so high orders do not overflow.
pub(crate) fn ln_moment_from_tail(tail: &TailFunction<f64>, p: f64) -> f64 {
    let log_integrand = |t: f64| -> f64 {
        if t <= 0.0 {
            return f64::NEG_INFINITY;
        }
        p.ln() + (p - 1.0) * t.ln() - tail.value(t)
    };
    let support = tail.support_bound();
    let upper_scan = if support.is_finite() { support } else { 1e6 };
    let mut peak = f64::NEG_INFINITY;
    let mut peak_t = 1.0;
    let scan = crate::tailkit::log_grid(1e-8_f64.min(upper_scan * 1e-8), upper_scan, 2000);
    for &t in &scan {
        let v = log_integrand(t);
        if v > peak {
            peak = v;
            peak_t = t;
        }
    }
    if !peak.is_finite() {
        return f64::NEG_INFINITY;
    }
    let f = |t: f64| (log_integrand(t) - peak).exp();
    let value = if support.is_finite() {
        // split at the jump points of a step tail
        let mut total = 0.0;
        let mut cuts = vec![0.0, peak_t.min(support), support];
        cuts.dedup();
        for w in cuts.windows(2) {
            total += quad::integrate(f, w[0], w[1], 1e-12).value;
        }
        total
    } else {
        let head = quad::integrate(f, 0.0, peak_t, 1e-12).value;
        let width = (peak_t * 0.25).max(1e-3);
        head + quad::integrate_to_infinity(f, peak_t, width, 1e-12, 1e-13).value
    };
    peak + value.ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum RegularityClass {
    /// `‖X‖_p ≤ α (p/q) ‖X‖_q` for `p ≥ q ≥ 2`.
    AlphaRegular { alpha: f64 },
    /// `‖X‖_{βp} ≥ 2‖X‖_p` for `p ≥ 2`.
    Speed { beta: f64 },
}

/// Grid-certified verdict of a class check.
///
/// For `AlphaRegular`, `witness_pair = (q, p)` maximizes `‖X‖_p q / (p ‖X‖_q)`,
/// `ratio = ‖X‖_p / ‖X‖_q` and `normalized = ratio · q / p` (the smallest α the grid allows).
/// For `Speed`, `witness_pair = (p, βp)` minimizes `‖X‖_{βp} / ‖X‖_p = ratio`, and `normalized = ratio / 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityWitness {
    pub class: RegularityClass,
    pub verdict: Verdict,
    pub witness_pair: (f64, f64),
    pub ratio: f64,
    pub normalized: f64,
    pub grid: Vec<f64>,
}

impl fmt::Display for RegularityWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:?} {:?} at ({}, {}) with moment ratio {} on a {}-point grid",
            self.class,
            self.verdict,
            self.witness_pair.0,
            self.witness_pair.1,
            self.ratio,
            self.grid.len()
        )
    }
}

impl RegularityWitness {
    /// Recomputes the defining inequality at the witness pair.
    pub fn recheck(&self, model: &DistributionModel) -> Result<bool> {
        let (a, b) = self.witness_pair;
        Ok(match self.class {
            RegularityClass::AlphaRegular { alpha } => {
                model.moment(b)? <= alpha * (b / a) * model.moment(a)? * (1.0 + CLASS_TIE_TOL)
            }
            RegularityClass::Speed { .. } => model.moment(b)? >= 2.0 * model.moment(a)? * (1.0 - CLASS_TIE_TOL),
        })
    }
}

fn checked_grid(p_grid: &[f64]) -> Result<Vec<f64>> {
    if p_grid.is_empty() {
        return domain("moment grid is empty");
    }
    if p_grid.iter().any(|&p| !(p >= 2.0) || !p.is_finite()) {
        return domain("moment grid must lie in [2, ∞)");
    }
    let mut grid = p_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    Ok(grid)
}

/// Grid check of `‖X‖_p ≤ α (p/q) ‖X‖_q` over all grid pairs `p ≥ q`.
pub fn check_alpha_regular(model: &DistributionModel, alpha: f64, p_grid: &[f64]) -> Result<RegularityWitness> {
    if !(alpha >= 1.0) {
        return domain("alpha must be >= 1");
    }
    let grid = checked_grid(p_grid)?;
    let norms: Vec<f64> = grid.iter().map(|&p| model.moment(p)).collect::<Result<_>>()?;
    let mut best = ((grid[0], grid[0]), 1.0, 1.0);
    for (i, &q) in grid.iter().enumerate() {
        for (j, &p) in grid.iter().enumerate().skip(i) {
            let ratio = norms[j] / norms[i];
            let normalized = ratio * q / p;
            if normalized > best.2 {
                best = ((q, p), ratio, normalized);
            }
        }
    }
    Ok(RegularityWitness {
        class: RegularityClass::AlphaRegular { alpha },
        verdict: Verdict::from_bool(best.2 <= alpha * (1.0 + CLASS_TIE_TOL)),
        witness_pair: best.0,
        ratio: best.1,
        normalized: best.2,
        grid,
    })
}

/// Grid check of `‖X‖_{βp} ≥ 2‖X‖_p`.
pub fn check_speed_beta(model: &DistributionModel, beta: f64, p_grid: &[f64]) -> Result<RegularityWitness> {
    if !(beta > 1.0) || !beta.is_finite() {
        return domain("beta must be finite and > 1");
    }
    let grid = checked_grid(p_grid)?;
    let mut best: Option<((f64, f64), f64)> = None;
    for &p in &grid {
        let ratio = model.moment(beta * p)? / model.moment(p)?;
        if best.is_none_or(|(_, r)| ratio < r) {
            best = Some(((p, beta * p), ratio));
        }
    }
    let (pair, ratio) = best.expect("grid is nonempty");
    Ok(RegularityWitness {
        class: RegularityClass::Speed { beta },
        verdict: Verdict::from_bool(ratio >= 2.0 * (1.0 - CLASS_TIE_TOL)),
        witness_pair: pair,
        ratio,
        normalized: ratio / 2.0,
        grid,
    })
}

/// Smallest α the default grid certifies (never below 1).
pub fn certified_alpha(model: &DistributionModel) -> Result<f64> {
    let w = check_alpha_regular(model, 1.0, &DEFAULT_P_GRID)?;
    Ok(w.normalized.max(1.0))
}

pub(crate) fn require(w: RegularityWitness) -> Result<RegularityWitness> {
    if w.verdict.passed() {
        Ok(w)
    } else {
        Err(Error::NotRegular(Box::new(w)))
    }
}
