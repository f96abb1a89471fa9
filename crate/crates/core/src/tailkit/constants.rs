use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::scalar::{lit, Real};

use super::tail::{log_grid, TailFunction};

/// Explicit constants of the regular-tail envelope for a given α.
///
/// `kappa = 4e²α³/(e−1)` is the sublinearity dilation, `b = ln(e(2α)²)`,
/// `threshold = κ·t0 = 4eα³` is where the envelope starts, and `dilation = κ²`
/// is the argument stretch in `M(t) ≤ N(t) ≤ M(dilation·t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularityConstants<F> {
    pub alpha: F,
    #[serde(rename = "kappa_alpha")]
    pub kappa: F,
    #[serde(rename = "b_alpha")]
    pub b: F,
    #[serde(rename = "T_alpha")]
    pub threshold: F,
    #[serde(rename = "L_alpha")]
    pub dilation: F,
    pub t0: F,
}

pub fn regularity_constants<F: Real>(alpha: F) -> Result<RegularityConstants<F>> {
    if !(alpha >= F::one()) || !alpha.is_finite() {
        return domain("alpha must be finite and >= 1");
    }
    let e = F::E();
    let one = F::one();
    let a3 = alpha * alpha * alpha;
    let kappa = lit::<F>(4.0) * e * e * a3 / (e - one);
    let two_alpha = alpha + alpha;
    Ok(RegularityConstants {
        alpha,
        kappa,
        b: (e * two_alpha * two_alpha).ln(),
        threshold: lit::<F>(4.0) * e * a3,
        dilation: kappa * kappa,
        t0: one - one / e,
    })
}

/// `C(α, β, r) = (ln 2 + 2β^k ln(2α)) / ln 2` with `k` the least integer such that `2^{k−2} ≥ r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthConstant<F> {
    pub c: F,
    pub k: i32,
}

pub fn growth_constant<F: Real>(alpha: F, beta: F, r: F) -> Result<GrowthConstant<F>> {
    if !(r > F::one()) || !r.is_finite() {
        return domain("growth ratio r must be finite and > 1");
    }
    if !(alpha >= F::one()) || !(beta > F::one()) {
        return domain("growth constant needs alpha >= 1 and beta > 1");
    }
    let mut k: i32 = 2;
    while lit::<F>(2.0).powi(k - 2) < r {
        k += 1;
    }
    let ln2 = F::LN_2();
    let c = (ln2 + lit::<F>(2.0) * beta.powi(k) * (alpha + alpha).ln()) / ln2;
    Ok(GrowthConstant { c, k })
}

/// Bound on `N(s)` for `s < 2^{k−1}` valid across `R_α ∩ S_β`: `2(ln 2 + 2β^k ln(2α))`.
pub fn tail_cap<F: Real>(alpha: F, beta: F, k: i32) -> F {
    let two = lit::<F>(2.0);
    two * (F::LN_2() + two * beta.powi(k) * (alpha + alpha).ln())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthCheck<F> {
    pub pass: bool,
    /// Largest observed `N(rt)/N(t)` (∞ when `N(t) = 0 < N(rt)` or `N` leaves `[0, ∞)`).
    pub worst_ratio: F,
    pub worst_t: F,
    pub t_min: F,
    pub t_max: F,
    pub points: usize,
}

/// Grid check of `N(rt) ≤ C·N(t)` over `[t_min, 100·t_min]` (256 log points).
pub fn check_moderate_growth<F: Real>(n: &TailFunction<F>, r: F, c: F, t_min: F) -> Result<GrowthCheck<F>> {
    check_moderate_growth_on(n, r, c, t_min, t_min * lit(100.0), 256)
}

pub fn check_moderate_growth_on<F: Real>(
    n: &TailFunction<F>,
    r: F,
    c: F,
    t_min: F,
    t_max: F,
    points: usize,
) -> Result<GrowthCheck<F>> {
    if !(t_min >= lit(2.0)) {
        return domain("moderate growth is checked for t >= 2");
    }
    if !(r > F::one()) || !(t_max >= t_min) || points < 2 {
        return domain("need r > 1, t_max >= t_min and at least two grid points");
    }
    let mut worst = F::zero();
    let mut worst_t = t_min;
    for t in log_grid(t_min, t_max, points) {
        let (lo, hi) = (n.value(t), n.value(r * t));
        let ratio = if !lo.is_finite() || !hi.is_finite() {
            F::infinity()
        } else if lo == F::zero() {
            if hi > F::zero() {
                F::infinity()
            } else {
                F::zero()
            }
        } else {
            hi / lo
        };
        if ratio > worst || (worst == F::zero() && t == t_min) {
            worst = ratio;
            worst_t = t;
        }
    }
    Ok(GrowthCheck { pass: worst <= c, worst_ratio: worst, worst_t, t_min, t_max, points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{E, SQRT_2};

    #[test]
    fn alpha_one_values() {
        let k = regularity_constants(1.0f64).unwrap();
        assert_relative_eq!(k.kappa, 4.0 * E * E / (E - 1.0), max_relative = 1e-15);
        assert_relative_eq!(k.kappa, 17.2009, max_relative = 1e-5);
        assert_relative_eq!(k.threshold, 10.873_127_313_836_1, max_relative = 1e-12);
        assert_relative_eq!(k.dilation, 295.87, max_relative = 1e-4);
        assert_relative_eq!(k.b, 1.0 + 4f64.ln(), max_relative = 1e-15);
        assert_relative_eq!(k.b, 2.386_29, max_relative = 1e-5);
        assert!(regularity_constants(0.99f64).is_err());
    }

    #[test]
    fn cubic_scaling_and_identity() {
        let one = regularity_constants(1.0f64).unwrap();
        let two = regularity_constants(2.0f64).unwrap();
        assert_relative_eq!(two.threshold, 32.0 * E, max_relative = 1e-15);
        assert_relative_eq!(two.threshold, 8.0 * one.threshold, max_relative = 1e-15);
        assert_relative_eq!(two.threshold, 86.985, max_relative = 1e-5);
        for a in [1.0f64, 1.5, 3.0] {
            let k = regularity_constants(a).unwrap();
            assert_relative_eq!(k.kappa, k.b.exp() / (1.0 - 1.0 / E) * a, max_relative = 1e-13);
            assert_relative_eq!(k.threshold, k.kappa * k.t0, max_relative = 1e-13);
        }
    }

    #[test]
    fn constants_increase_with_alpha() {
        let mut prev = regularity_constants(1.0f64).unwrap();
        for a in [1.1, 1.5, 2.0, 4.0] {
            let k = regularity_constants(a).unwrap();
            assert!(k.kappa > prev.kappa && k.b > prev.b && k.threshold > prev.threshold && k.dilation > prev.dilation);
            prev = k;
        }
    }

    #[test]
    fn growth_constant_examples() {
        let g = growth_constant(1.0f64, 2.0, 2.0).unwrap();
        assert_eq!(g.k, 3);
        assert_relative_eq!(g.c, 17.0, max_relative = 1e-14);
        let g = growth_constant(1.0f64, 2.0, 4.0).unwrap();
        assert_eq!(g.k, 4);
        assert_relative_eq!(g.c, 33.0, max_relative = 1e-14);
        let g = growth_constant(1.0f64, 2.0, 1.5).unwrap();
        assert_eq!(g.k, 3);
        assert_relative_eq!(g.c, 17.0, max_relative = 1e-14);
        assert!(growth_constant(1.0f64, 2.0, 1.0).is_err());
        // f32 path
        let g = growth_constant(1.0f32, 2.0, 4.0).unwrap();
        assert!((g.c - 33.0).abs() < 1e-4);
    }

    #[test]
    fn linear_tail_has_ratio_two() {
        let n = TailFunction::linear(SQRT_2);
        let chk = check_moderate_growth(&n, 2.0, 2.0, 2.0).unwrap();
        assert!(chk.pass);
        assert_relative_eq!(chk.worst_ratio, 2.0, max_relative = 1e-14);
    }

    #[test]
    fn gaussian_tail_moderate_growth() {
        let n = TailFunction::analytic(crate::special::gaussian_tail_exponent, f64::INFINITY);
        let c = growth_constant(1.0, 8.0, 2.0).unwrap().c;
        let chk = check_moderate_growth(&n, 2.0, c, 2.0).unwrap();
        assert!(chk.pass, "{chk:?}");
    }

    #[test]
    fn bounded_support_fails() {
        let n = TailFunction::analytic(|t: f64| if t < 1.0 { 0.0 } else { f64::INFINITY }, 1.0);
        let chk = check_moderate_growth(&n, 2.0, 1e6, 2.0).unwrap();
        assert!(!chk.pass);
        assert!(chk.worst_ratio.is_infinite());
    }

    #[test]
    fn moderate_growth_domain() {
        let n = TailFunction::linear(1.0f64);
        assert!(check_moderate_growth(&n, 2.0, 2.0, 1.0).is_err());
    }
}
