use crate::error::{domain, Error, Result};
use crate::scalar::{lit, to_f64, Real};

use super::tail::{log_grid, TailFunction};

/// Multipliers `λ` used for the grid check of `f(cλt) ≥ λ f(t)`.
pub const SUBLINEARITY_LAMBDAS: [f64; 4] = [1.0, 2.0, 4.0, 8.0];

#[derive(Debug, Clone, Copy)]
pub struct MinorantOptions<F> {
    /// Trapezoid resolution of the running-sup integrand.
    pub points_per_decade: usize,
    /// Right end of the computed grid; `None` picks `100·max(c³t0, c²)`.
    /// Past it the minorant continues linearly with its last slope.
    pub horizon: Option<F>,
}

impl<F> Default for MinorantOptions<F> {
    fn default() -> Self {
        Self { points_per_decade: 4096, horizon: None }
    }
}

/// Convex minorant of a sublinear nondecreasing `f`:
///
/// `g(t) = ∫_{c t0}^t sup_{c t0 ≤ y ≤ x} f(y/c)/y dx`, with `g = 0` below `c·t0`.
///
/// Then `g` is convex, `g(c t0) = 0` and `g(t) ≤ f(t) ≤ g(c² t)` for `t ≥ c t0`,
/// provided `f(cλt) ≥ λ f(t)` for `λ ≥ 1`, `t ≥ t0`. That precondition is checked on a
/// grid (`λ ∈ {1,2,4,8}`) and a violation is returned with its witness.
pub fn convex_minorant<F: Real>(f: &TailFunction<F>, c: F, t0: F) -> Result<TailFunction<F>> {
    convex_minorant_with(f, c, t0, MinorantOptions::default())
}

pub fn convex_minorant_with<F: Real>(f: &TailFunction<F>, c: F, t0: F, opts: MinorantOptions<F>) -> Result<TailFunction<F>> {
    if !(c >= lit(2.0)) || !c.is_finite() {
        return domain("minorant dilation c must be finite and >= 2");
    }
    if !(t0 >= F::zero()) || !t0.is_finite() {
        return domain("minorant threshold t0 must be finite and >= 0");
    }
    if opts.points_per_decade < 2 {
        return domain("need at least two grid points per decade");
    }
    let hundred = lit::<F>(100.0);
    let start = c * t0;
    let horizon = opts.horizon.unwrap_or_else(|| hundred * (c * c * c * t0).max(c * c));
    if !(horizon > start) {
        return domain("minorant horizon must exceed c·t0");
    }
    let cutoff = c * f.support_bound();
    let upper = horizon.min(cutoff);
    let first = if start > F::zero() { start } else { upper * lit(1e-10) };
    if !(upper > first) {
        return domain("support of f ends before c·t0");
    }

    check_sublinearity(f, c, t0.max(first / c), upper / c)?;

    let decades = to_f64((upper / first).log10());
    let points = ((decades * opts.points_per_decade as f64).ceil() as usize + 1).max(2);
    let mut xs = log_grid(first, upper, points);
    let prepend_zero = start == F::zero();

    let mut hs = Vec::with_capacity(xs.len() + 1);
    let mut running = F::zero();
    for &x in &xs {
        let v = f.value(x / c) / x;
        // at x = c·support the integrand jumps to ∞; use the left limit
        if v.is_finite() && v > running {
            running = v;
        }
        hs.push(running);
    }
    if prepend_zero {
        xs.insert(0, F::zero());
        hs.insert(0, hs[0]);
    }
    let half = lit::<F>(0.5);
    let mut gs = Vec::with_capacity(xs.len());
    gs.push(F::zero());
    for i in 0..xs.len() - 1 {
        let step = (hs[i] + hs[i + 1]) * half * (xs[i + 1] - xs[i]);
        gs.push(gs[i] + step);
    }
    let support = if cutoff.is_finite() { cutoff } else { F::infinity() };
    Ok(TailFunction::integrated(xs, gs, hs, support))
}

fn check_sublinearity<F: Real>(f: &TailFunction<F>, c: F, lo: F, hi: F) -> Result<()> {
    if !(hi > lo) {
        return Ok(());
    }
    let decades = to_f64((hi / lo).log10()).max(0.1);
    let grid = log_grid(lo, hi, ((decades * 64.0).ceil() as usize).max(8));
    let tol = lit::<F>(1e-12);
    let mut prev = F::zero();
    for &t in &grid {
        let ft = f.value(t);
        if ft < prev * (F::one() - tol) {
            return Err(Error::Domain(format!("f is not nondecreasing near t = {}", to_f64(t))));
        }
        prev = ft;
        for &lam in &SUBLINEARITY_LAMBDAS {
            let l = lit::<F>(lam);
            let lhs = f.value(c * l * t);
            let rhs = l * ft;
            if lhs < rhs * (F::one() - tol) {
                return Err(Error::SublinearityViolated { lambda: lam, t: to_f64(t) });
            }
        }
    }
    Ok(())
}
