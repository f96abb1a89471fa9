use crate::error::{domain, Result};
use crate::scalar::{lit, Real};

use super::process::ProcessSpec;

const REL_TOL: f64 = 1e-10;

/// `ln Σ_k C(r,2k) (a/u)^{2k} m_{2k}` = `ln E|1 + aX/u|^r` for symmetric `X` and even `r`.
fn ln_factor<F: Real>(a: F, moments: &[F], r: u32, ln_u: F) -> F {
    let ln_ratio = a.abs().ln() - ln_u;
    let mut binom = F::one();
    let mut total = F::one();
    for (k, &m) in moments.iter().enumerate().take(r as usize / 2 + 1).skip(1) {
        let (j, rr) = (lit::<F>(2.0 * k as f64), lit::<F>(r as f64));
        binom = binom * (rr - j + lit(2.0)) * (rr - j + F::one()) / (j * (j - F::one()));
        total = total + binom * m * (j * ln_ratio).exp();
    }
    total.ln()
}

/// `|||(aᵢXᵢ)|||_r = inf {u > 0 : Πᵢ E|1 + aᵢXᵢ/u|^r ≤ e^r}` for symmetric `Xᵢ` and even `r`.
///
/// `even_moments[i][k] = E Xᵢ^{2k}` for `k ≤ r/2`. The product is strictly decreasing in `u`,
/// so the root is found by bisection on `ln u` to relative tolerance `1e−10`.
pub fn moment_functional<F: Real>(coeffs: &[F], even_moments: &[Vec<F>], r: u32) -> Result<F> {
    if r < 2 || r % 2 == 1 {
        return domain(format!("the moment functional needs an even order r >= 2, got {r}"));
    }
    if coeffs.len() != even_moments.len() {
        return domain("one moment table per coefficient is required");
    }
    let active: Vec<(F, &[F])> =
        coeffs.iter().zip(even_moments).filter(|(a, _)| **a != F::zero()).map(|(a, m)| (*a, m.as_slice())).collect();
    if active.is_empty() {
        return Ok(F::zero());
    }
    if active.iter().any(|(_, m)| m.len() <= (r / 2) as usize) {
        return domain("moment tables must reach order r");
    }
    let target = lit::<F>(r as f64);
    let excess = |ln_u: F| active.iter().map(|&(a, m)| ln_factor(a, m, r, ln_u)).sum::<F>() - target;
    let top = active.iter().map(|(a, _)| a.abs()).fold(F::zero(), F::max);
    let step = lit::<F>(2.0);
    let mut lo = top.ln();
    let mut hi = lo;
    while excess(hi) > F::zero() {
        hi = hi + step;
    }
    while excess(lo) <= F::zero() {
        lo = lo - step;
    }
    let tol = lit::<F>(REL_TOL).ln_1p();
    while hi - lo > tol {
        let mid = lit::<F>(0.5) * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if excess(mid) > F::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((lit::<F>(0.5) * (lo + hi)).exp())
}

/// [`moment_functional`] with the coordinate moment tables of `proc`.
pub fn moment_functional_norm(coeffs: &[f64], proc: &ProcessSpec, r: u32) -> Result<f64> {
    proc.check_dimension(coeffs.len())?;
    let tables: Vec<Vec<f64>> =
        proc.models().iter().map(|m| (0..=(r / 2) as usize).map(|k| m.even_moment(k)).collect()).collect();
    moment_functional(coeffs, &tables, r)
}

/// Constants of `(e−1)/(2e²)·||| ≤ ‖S‖_r ≤ e·|||`.
pub fn moment_bracket_constants() -> (f64, f64) {
    let e = std::f64::consts::E;
    ((e - 1.0) / (2.0 * e * e), e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::DistributionModel;
    use approx::assert_relative_eq;
    use std::f64::consts::E;

    #[test]
    fn single_rademacher_closed_form() {
        let proc = ProcessSpec::iid(DistributionModel::rademacher(), 1);
        let u = moment_functional_norm(&[1.0], &proc, 2).unwrap();
        assert_relative_eq!(u, 1.0 / (E * E - 1.0).sqrt(), max_relative = 1e-9);
        assert_relative_eq!(u, 0.39562, max_relative = 1e-5);
    }

    #[test]
    fn zero_and_odd() {
        let proc = ProcessSpec::iid(DistributionModel::gaussian(), 2);
        assert_eq!(moment_functional_norm(&[0.0, 0.0], &proc, 4).unwrap(), 0.0);
        assert!(moment_functional_norm(&[1.0, 0.0], &proc, 3).is_err());
    }

    #[test]
    fn homogeneous_of_degree_one() {
        let proc = ProcessSpec::iid(DistributionModel::sym_exponential(), 3);
        let a = moment_functional_norm(&[1.0, 2.0, -0.5], &proc, 4).unwrap();
        let b = moment_functional_norm(&[3.0, 6.0, -1.5], &proc, 4).unwrap();
        assert_relative_eq!(b, 3.0 * a, max_relative = 1e-9);
    }

    #[test]
    fn f32_instantiation() {
        let m: Vec<f32> = vec![1.0, 1.0];
        let u = moment_functional(&[1.0f32], &[m], 2).unwrap();
        assert!((u - 0.395_62).abs() < 1e-4);
    }

    #[test]
    fn bracket_for_three_rademachers() {
        let proc = ProcessSpec::iid(DistributionModel::rademacher(), 3);
        let f = moment_functional_norm(&[1.0; 3], &proc, 4).unwrap();
        let s = 21f64.powf(0.25);
        let (lo, hi) = moment_bracket_constants();
        assert!(lo * f <= s && s <= hi * f);
    }
}
