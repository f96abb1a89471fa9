use std::fmt;
use std::sync::Arc;

use crate::error::{domain, Result};
use crate::scalar::{lit, Real};

type Evaluator<F> = Arc<dyn Fn(F) -> F + Send + Sync>;

#[derive(Clone)]
enum Repr<F: Real> {
    Analytic(Evaluator<F>),
    /// Piecewise-linear through `(ts[i], ns[i])`, linear extrapolation past the ends.
    Linear {
        ts: Arc<[F]>,
        ns: Arc<[F]>,
    },
    /// `g(t) = ∫_{start}^t h`, with `h` piecewise linear through `(ts[i], hs[i])`;
    /// `gs[i] = g(ts[i])`. Zero below `ts[0]`, slope `hs.last()` past the end.
    Integrated {
        ts: Arc<[F]>,
        gs: Arc<[F]>,
        hs: Arc<[F]>,
    },
}

/// Nondecreasing tail exponent `t ↦ N(t) = -ln P(|X| > t)` with values in `[0, ∞]`.
///
/// `support_bound` is `inf {t : N(t) = ∞}`; at and beyond it the function reports `+∞`.
#[derive(Clone)]
pub struct TailFunction<F: Real> {
    repr: Repr<F>,
    support_bound: F,
    /// `N(support_bound)` itself is finite (the jump to ∞ happens just after).
    closed_at_support: bool,
}

impl<F: Real> fmt::Debug for TailFunction<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.repr {
            Repr::Analytic(_) => "analytic",
            Repr::Linear { .. } => "linear-grid",
            Repr::Integrated { .. } => "integrated-grid",
        };
        f.debug_struct("TailFunction").field("repr", &kind).field("support_bound", &self.support_bound).finish()
    }
}

fn segment<F: Real>(ts: &[F], t: F) -> usize {
    // index i with ts[i] <= t < ts[i+1], clamped to a valid segment
    match ts.binary_search_by(|x| x.partial_cmp(&t).unwrap_or(std::cmp::Ordering::Less)) {
        Ok(i) => i.min(ts.len().saturating_sub(2)),
        Err(0) => 0,
        Err(i) => (i - 1).min(ts.len().saturating_sub(2)),
    }
}

impl<F: Real> TailFunction<F> {
    /// Wraps a closed-form exponent. `support_bound = ∞` for unbounded laws.
    pub fn analytic(f: impl Fn(F) -> F + Send + Sync + 'static, support_bound: F) -> Self {
        Self { repr: Repr::Analytic(Arc::new(f)), support_bound, closed_at_support: false }
    }

    /// `N(t) = slope · t`.
    pub fn linear(slope: F) -> Self {
        Self::analytic(move |t| slope * t, F::infinity())
    }

    /// `N(t) = (t / scale)^exponent`.
    pub fn power(scale: F, exponent: F) -> Self {
        Self::analytic(move |t| (t / scale).powf(exponent), F::infinity())
    }

    /// Monotone piecewise-linear interpolation of grid samples.
    pub fn from_grid(ts: Vec<F>, ns: Vec<F>, support_bound: F) -> Result<Self> {
        if ts.len() != ns.len() || ts.len() < 2 {
            return domain("tail grid needs at least two (t, N) pairs of equal length");
        }
        if ts[0] < F::zero() || ns[0] < F::zero() {
            return domain("tail grid must start at t >= 0 with N >= 0");
        }
        for w in ts.windows(2) {
            if w[1] <= w[0] {
                return domain("tail grid abscissae must be strictly increasing");
            }
        }
        for w in ns.windows(2) {
            if w[1] < w[0] || !w[1].is_finite() {
                return domain("tail grid values must be finite and nondecreasing");
            }
        }
        Ok(Self { repr: Repr::Linear { ts: ts.into(), ns: ns.into() }, support_bound, closed_at_support: false })
    }

    pub(crate) fn integrated(ts: Vec<F>, gs: Vec<F>, hs: Vec<F>, support_bound: F) -> Self {
        Self { repr: Repr::Integrated { ts: ts.into(), gs: gs.into(), hs: hs.into() }, support_bound, closed_at_support: true }
    }

    pub fn support_bound(&self) -> F {
        self.support_bound
    }

    /// `N(t)`; negative arguments are a domain error.
    pub fn try_value(&self, t: F) -> Result<F> {
        if t < F::zero() || t.is_nan() {
            return domain("tail function evaluated at t < 0");
        }
        Ok(self.value(t))
    }

    /// `N(t)` for `t ≥ 0` (negative input is clamped to 0).
    pub fn value(&self, t: F) -> F {
        let t = t.max(F::zero());
        if t > self.support_bound || (t == self.support_bound && !self.closed_at_support) {
            return F::infinity();
        }
        match &self.repr {
            Repr::Analytic(f) => f(t),
            Repr::Linear { ts, ns } => {
                let i = segment(ts, t);
                let (t0, t1) = (ts[i], ts[i + 1]);
                let w = (t - t0) / (t1 - t0);
                (ns[i] + w * (ns[i + 1] - ns[i])).max(F::zero())
            }
            Repr::Integrated { ts, gs, hs } => {
                if t <= ts[0] {
                    return F::zero();
                }
                let last = ts.len() - 1;
                if t >= ts[last] {
                    return gs[last] + hs[last] * (t - ts[last]);
                }
                let i = segment(ts, t);
                let dt = t - ts[i];
                let width = ts[i + 1] - ts[i];
                gs[i] + hs[i] * dt + (hs[i + 1] - hs[i]) * dt * dt / (lit::<F>(2.0) * width)
            }
        }
    }

    /// Generalised inverse `inf {t ≥ 0 : N(t) ≥ level}`, by bisection.
    pub fn inverse(&self, level: F) -> F {
        if level <= self.value(F::zero()) {
            return F::zero();
        }
        let mut lo = F::zero();
        let mut hi = if self.support_bound.is_finite() {
            self.support_bound
        } else {
            let mut h = F::one();
            while self.value(h) < level && h.is_finite() {
                lo = h;
                h = h + h;
            }
            h
        };
        if self.support_bound.is_finite() && self.value(hi) < level {
            return hi;
        }
        for _ in 0..200 {
            let mid = lo + (hi - lo) * lit(0.5);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.value(mid) >= level {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }

    /// Samples `(t, N(t))` on the given abscissae (for CSV export).
    pub fn tabulate(&self, ts: &[F]) -> Vec<(F, F)> {
        ts.iter().map(|&t| (t, self.value(t))).collect()
    }
}

/// `points` log-spaced abscissae covering `[lo, hi]` inclusive.
pub fn log_grid<F: Real>(lo: F, hi: F, points: usize) -> Vec<F> {
    assert!(lo > F::zero() && hi >= lo && points >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    let steps = lit::<F>((points - 1) as f64);
    let mut out: Vec<F> = (0..points).map(|i| (a + (b - a) * lit::<F>(i as f64) / steps).exp()).collect();
    out[0] = lo;
    out[points - 1] = hi;
    out
}
