use crate::error::{domain, Result};
use crate::scalar::Real;

use super::tree::block_cap;

/// Exact `γ_X` of an `m`-point space whose pairs are all at distance `pair_distance(p)` under `d_p`.
///
/// Every level `n` with `N_n < m` keeps a non-singleton block, and singletons are reachable at
/// `n* = min {n ≥ 1 : N_n ≥ m}`, so `γ_X = Σ_{n<n*} pair_distance(2^n)`.
pub fn uniform_space_gamma<F: Real>(m: usize, pair_distance: impl Fn(u32) -> F) -> Result<F> {
    if m < 2 {
        return domain("a uniform space needs at least two points");
    }
    let n_star = (1..).find(|&n| block_cap(n) >= m).expect("caps grow without bound");
    Ok((0..n_star).map(|n| pair_distance(1u32 << n)).fold(F::zero(), |a, x| a + x))
}

/// `d_p(eᵢ, eⱼ) = 2·2^{−1/p}` for i.i.d. Rademacher coordinates.
pub fn rademacher_basis_distance(p: u32) -> f64 {
    2.0 * 2f64.powf(-1.0 / p as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn oracle_values() {
        assert_relative_eq!(uniform_space_gamma(2, rademacher_basis_distance).unwrap(), 1.0, max_relative = 1e-15);
        let g257 = uniform_space_gamma(257, rademacher_basis_distance).unwrap();
        assert_relative_eq!(g257, 1.0 + 2f64.sqrt() + 8f64.powf(0.25) + 128f64.powf(0.125), max_relative = 1e-15);
        assert!((g257 - 5.93001).abs() < 1e-5);
        let g65537 = uniform_space_gamma(65537, rademacher_basis_distance).unwrap();
        assert!((g65537 - g257 - 2.0 * 2f64.powf(-1.0 / 16.0)).abs() < 1e-14);
        assert!((g65537 - 7.84522).abs() < 1e-5);
        assert!(uniform_space_gamma(1, rademacher_basis_distance).is_err());
        // f32 instantiation
        let g: f32 = uniform_space_gamma(17, |p| rademacher_basis_distance(p) as f32).unwrap();
        assert!((g - (1.0 + 2f32.sqrt() + 8f32.powf(0.25))).abs() < 1e-5);
    }
}
