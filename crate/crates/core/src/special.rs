//! Thin layer over `statrs` special functions, plus a log-erfc that stays
//! finite far into the Gaussian tail.

use std::f64::consts::{PI, SQRT_2};

pub use statrs::function::gamma::ln_gamma;

/// `ln erfc(x)` for `x ≥ 0`, accurate beyond the underflow point of `erfc`.
pub fn ln_erfc(x: f64) -> f64 {
    if x < 25.0 {
        return statrs::function::erf::erfc(x).ln();
    }
    let z = 1.0 / (x * x);
    let series = 1.0 - 0.5 * z + 0.75 * z * z - 1.875 * z * z * z + 6.5625 * z * z * z * z;
    -x * x - (x * PI.sqrt()).ln() + series.ln()
}

/// `-ln P(|g| > t)` for a standard normal `g`.
pub fn gaussian_tail_exponent(t: f64) -> f64 {
    -ln_erfc(t / SQRT_2)
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / SQRT_2)
}

/// `|g|` at survival level `e^{-e}`, i.e. the inverse of [`gaussian_tail_exponent`].
pub fn gaussian_abs_quantile_from_exponent(e: f64) -> f64 {
    if e <= 0.0 {
        return 0.0;
    }
    if e < 600.0 {
        let q = statrs::function::erf::erfc_inv((-e).exp());
        if q.is_finite() {
            return SQRT_2 * q;
        }
    }
    // Newton on the asymptotic exponent for extreme levels.
    let mut t = (2.0 * e).sqrt();
    for _ in 0..50 {
        let f = gaussian_tail_exponent(t) - e;
        let slope = t + 1.0 / t;
        let step = f / slope;
        t -= step;
        if step.abs() < 1e-15 * t {
            break;
        }
    }
    t
}
