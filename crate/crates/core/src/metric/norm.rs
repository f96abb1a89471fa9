use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dist::{DistributionModel, Family};
use crate::error::{domain, Error, Result};
use crate::quad;
use crate::special::ln_gamma;
use crate::stochlab::RngStream;

use super::moment_functional::moment_functional_norm;
use super::process::ProcessSpec;

/// Nonzero coordinates allowed for automatic enumeration.
pub const AUTO_ENUMERATION_COORDS: usize = 20;
/// Nonzero coordinates allowed when enumeration is forced.
pub const FORCED_ENUMERATION_COORDS: usize = 24;
const AUTO_ENUMERATION_PATTERNS: f64 = 1_048_576.0;
const FORCED_ENUMERATION_PATTERNS: f64 = 268_435_456.0;
/// Largest order accepted by the Monte Carlo route.
pub const MC_MAX_ORDER: f64 = 128.0;
pub const DEFAULT_MC_SAMPLES: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMethod {
    /// `‖a‖₂ · ‖g‖_p` for Gaussian coordinates.
    ClosedForm,
    /// Exact sum over the finite support.
    Enumeration,
    /// Exact even-moment expansion of `E(Σ aᵢXᵢ)^p`.
    MomentExpansion,
    /// Characteristic-function integral for `p = 1`.
    Quadrature,
    MonteCarlo,
    /// Midpoint of the two-sided moment-functional bracket (even `p` only).
    Bracket,
}

impl NormMethod {
    /// Methods whose value does not depend on a random stream.
    pub fn is_deterministic(self) -> bool {
        !matches!(self, NormMethod::MonteCarlo)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodChoice {
    Auto,
    Forced(NormMethod),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormOptions {
    pub choice: MethodChoice,
    pub mc_samples: usize,
    pub stream: RngStream,
}

impl Default for NormOptions {
    fn default() -> Self {
        Self { choice: MethodChoice::Auto, mc_samples: DEFAULT_MC_SAMPLES, stream: RngStream::new(0, 0) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IncrementNormResult {
    pub value: f64,
    /// 0 for exact methods; a 3σ band for Monte Carlo.
    pub error_bound: f64,
    pub method: NormMethod,
}

impl IncrementNormResult {
    fn exact(value: f64, method: NormMethod) -> Self {
        Self { value, error_bound: 0.0, method }
    }
}

/// `d_p(s, t) = ‖X_s − X_t‖_p`.
pub fn increment_norm(proc: &ProcessSpec, s: &[f64], t: &[f64], p: f64, opts: &NormOptions) -> Result<IncrementNormResult> {
    proc.check_dimension(s.len())?;
    proc.check_dimension(t.len())?;
    let diff: Vec<f64> = s.iter().zip(t).map(|(a, b)| a - b).collect();
    coefficient_norm(proc, &diff, p, opts)
}

/// `‖Σ aᵢXᵢ‖_p`.
pub fn coefficient_norm(proc: &ProcessSpec, a: &[f64], p: f64, opts: &NormOptions) -> Result<IncrementNormResult> {
    proc.check_dimension(a.len())?;
    if !(p >= 1.0) || !p.is_finite() {
        return domain(format!("norm order must be finite and >= 1, got {p}"));
    }
    if a.iter().any(|x| !x.is_finite()) {
        return domain("coefficients must be finite");
    }
    let terms: Vec<(f64, &DistributionModel)> =
        a.iter().zip(proc.models()).filter(|(x, _)| **x != 0.0).map(|(x, m)| (*x, m)).collect();
    let method = match opts.choice {
        MethodChoice::Forced(m) => m,
        MethodChoice::Auto => {
            if terms.is_empty() {
                return Ok(IncrementNormResult::exact(0.0, NormMethod::ClosedForm));
            }
            auto_method(&terms, p)
        }
    };
    if terms.is_empty() && method != NormMethod::MonteCarlo {
        return Ok(IncrementNormResult::exact(0.0, method));
    }
    match method {
        NormMethod::ClosedForm => closed_form(&terms, p),
        NormMethod::Enumeration => enumeration(&terms, p, FORCED_ENUMERATION_COORDS, FORCED_ENUMERATION_PATTERNS),
        NormMethod::MomentExpansion => moment_expansion(&terms, p),
        NormMethod::Quadrature => char_fn_quadrature(&terms, p),
        NormMethod::MonteCarlo => monte_carlo(&terms, p, opts),
        NormMethod::Bracket => bracket(a, proc, p),
    }
}

fn support_patterns(terms: &[(f64, &DistributionModel)]) -> Option<f64> {
    terms.iter().map(|(_, m)| m.atoms().map(|v| v.len() as f64)).product()
}

fn is_even_order(p: f64) -> bool {
    p.fract() == 0.0 && (p as u64).is_multiple_of(2) && p <= 1024.0
}

fn auto_method(terms: &[(f64, &DistributionModel)], p: f64) -> NormMethod {
    if terms.iter().all(|(_, m)| matches!(m.family(), Family::Gaussian)) {
        return NormMethod::ClosedForm;
    }
    if terms.len() <= AUTO_ENUMERATION_COORDS && support_patterns(terms).is_some_and(|k| k <= AUTO_ENUMERATION_PATTERNS) {
        return NormMethod::Enumeration;
    }
    if is_even_order(p) && expansion_ln_moment(terms, p).is_some() {
        return NormMethod::MomentExpansion;
    }
    if p == 1.0 && terms.iter().all(|(_, m)| m.ln_char_fn(0.0).is_some()) {
        return NormMethod::Quadrature;
    }
    NormMethod::MonteCarlo
}

fn closed_form(terms: &[(f64, &DistributionModel)], p: f64) -> Result<IncrementNormResult> {
    if !terms.iter().all(|(_, m)| matches!(m.family(), Family::Gaussian)) {
        return domain("closed form needs Gaussian coordinates");
    }
    let l2 = terms.iter().map(|(a, _)| a * a).sum::<f64>().sqrt();
    Ok(IncrementNormResult::exact(l2 * DistributionModel::gaussian().moment(p)?, NormMethod::ClosedForm))
}

fn enumeration(terms: &[(f64, &DistributionModel)], p: f64, max_coords: usize, max_patterns: f64) -> Result<IncrementNormResult> {
    let patterns = match support_patterns(terms) {
        Some(k) => k,
        None => return domain("enumeration needs finitely supported coordinates"),
    };
    if terms.len() > max_coords || patterns > max_patterns {
        return Err(Error::Resource(format!(
            "enumeration over {} nonzero coordinates ({patterns} patterns) exceeds the cap of {max_coords}",
            terms.len()
        )));
    }
    let laws: Vec<Vec<(f64, f64)>> =
        terms.iter().map(|(a, m)| m.atoms().expect("checked above").into_iter().map(|(x, w)| (a * x, w)).collect()).collect();
    let scale = terms.iter().map(|(a, _)| a.abs()).fold(0.0, f64::max);
    let value = enumerate_abs_moment(&laws, p, scale);
    Ok(IncrementNormResult::exact(scale * value.powf(1.0 / p), NormMethod::Enumeration))
}

/// `E|Σ Vᵢ / scale|^p` for independent finitely supported `Vᵢ` given as `(value, weight)` lists.
pub(crate) fn enumerate_abs_moment(laws: &[Vec<(f64, f64)>], p: f64, scale: f64) -> f64 {
    fn walk(laws: &[Vec<(f64, f64)>], depth: usize, sum: f64, weight: f64, p: f64, scale: f64) -> f64 {
        if depth == laws.len() {
            return weight * (sum / scale).abs().powf(p);
        }
        laws[depth].iter().map(|&(v, w)| walk(laws, depth + 1, sum + v, weight * w, p, scale)).sum()
    }
    walk(laws, 0, 0.0, 1.0, p, scale)
}

/// `ln E(Σ aᵢXᵢ)^p` for even integer `p` via `νₖ = E Sᵏ / k!`, which convolves like a power series.
fn expansion_ln_moment(terms: &[(f64, &DistributionModel)], p: f64) -> Option<f64> {
    let order = p as usize;
    let scale = terms.iter().map(|(a, _)| a * a).sum::<f64>().sqrt();
    let ln_fact: Vec<f64> = (0..=order).map(|k| ln_gamma(k as f64 + 1.0)).collect();
    let mut nu = vec![0.0; order + 1];
    nu[0] = 1.0;
    for (a, model) in terms {
        let ln_a = (a.abs() / scale).ln();
        let term: Vec<f64> = (0..=order)
            .map(|k| {
                if k == 0 {
                    1.0
                } else if k % 2 == 1 {
                    0.0
                } else {
                    (model.ln_abs_moment(k as f64) + k as f64 * ln_a - ln_fact[k]).exp()
                }
            })
            .collect();
        if term.iter().any(|x| !x.is_finite()) {
            return None;
        }
        let mut next = vec![0.0; order + 1];
        for k in (0..=order).step_by(2) {
            next[k] = (0..=k).step_by(2).map(|j| nu[j] * term[k - j]).sum();
        }
        nu = next;
    }
    let v = nu[order];
    (v.is_finite() && v > 0.0).then(|| v.ln() + ln_fact[order] + p * scale.ln())
}

fn moment_expansion(terms: &[(f64, &DistributionModel)], p: f64) -> Result<IncrementNormResult> {
    if !is_even_order(p) {
        return domain("moment expansion needs an even integer order");
    }
    match expansion_ln_moment(terms, p) {
        Some(l) => Ok(IncrementNormResult::exact((l / p).exp(), NormMethod::MomentExpansion)),
        None => Err(Error::Resource(format!("moment expansion overflows at order {p}"))),
    }
}

/// `E|Y| = (2/π) ∫₀^∞ (1 − φ_Y(u)) / u² du`, in the variable `u = eˢ/σ`.
fn char_fn_quadrature(terms: &[(f64, &DistributionModel)], p: f64) -> Result<IncrementNormResult> {
    if p != 1.0 {
        return domain("characteristic-function quadrature computes the first absolute moment only");
    }
    if !terms.iter().all(|(_, m)| m.ln_char_fn(0.0).is_some()) {
        return domain("quadrature needs closed-form positive characteristic functions");
    }
    let sigma = terms.iter().map(|(a, _)| a * a).sum::<f64>().sqrt();
    let integrand = |s: f64| {
        let u = s.exp() / sigma;
        let ln_phi: f64 = terms.iter().map(|(a, m)| m.ln_char_fn(a * u).expect("checked above")).sum();
        -ln_phi.exp_m1() * (-s).exp()
    };
    let q = quad::integrate(integrand, -40.0, 40.0, 1e-12);
    let factor = 2.0 / PI * sigma;
    // the truncated ends contribute at most e^{−40} (left) and e^{−40} (right) in these units
    let tail = 2.0 * (-40.0f64).exp();
    Ok(IncrementNormResult { value: factor * q.value, error_bound: factor * (q.error + tail), method: NormMethod::Quadrature })
}

fn monte_carlo(terms: &[(f64, &DistributionModel)], p: f64, opts: &NormOptions) -> Result<IncrementNormResult> {
    if p > MC_MAX_ORDER {
        return domain(format!("Monte Carlo norms are limited to p <= {MC_MAX_ORDER}"));
    }
    if opts.mc_samples < 2 {
        return domain("Monte Carlo needs at least two samples");
    }
    if terms.is_empty() {
        return Ok(IncrementNormResult { value: 0.0, error_bound: 0.0, method: NormMethod::MonteCarlo });
    }
    let mut rng = opts.stream.rng();
    let draws: Vec<f64> =
        (0..opts.mc_samples).map(|_| terms.iter().map(|(a, m)| a * m.draw(&mut rng)).sum::<f64>().abs()).collect();
    let top = draws.iter().cloned().fold(0.0, f64::max);
    if top == 0.0 {
        return Ok(IncrementNormResult { value: 0.0, error_bound: 0.0, method: NormMethod::MonteCarlo });
    }
    let n = draws.len() as f64;
    let scaled: Vec<f64> = draws.iter().map(|x| (x / top).powf(p)).collect();
    let mean = scaled.iter().sum::<f64>() / n;
    let var = scaled.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let stderr = (var / n).sqrt();
    let value = top * mean.powf(1.0 / p);
    // delta method: d(m^{1/p}) = m^{1/p−1}/p · dm
    let error_bound = 3.0 * top * mean.powf(1.0 / p - 1.0) / p * stderr;
    Ok(IncrementNormResult { value, error_bound, method: NormMethod::MonteCarlo })
}

fn bracket(a: &[f64], proc: &ProcessSpec, p: f64) -> Result<IncrementNormResult> {
    if !is_even_order(p) {
        return domain("the bracket is defined for even integer orders");
    }
    let f = moment_functional_norm(a, proc, p as u32)?;
    let e = std::f64::consts::E;
    let (lo, hi) = ((e - 1.0) / (2.0 * e * e) * f, e * f);
    Ok(IncrementNormResult { value: 0.5 * (lo + hi), error_bound: 0.5 * (hi - lo), method: NormMethod::Bracket })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn auto() -> NormOptions {
        NormOptions::default()
    }

    #[test]
    fn gaussian_closed_forms() {
        let g = ProcessSpec::iid(DistributionModel::gaussian(), 2);
        let r = increment_norm(&g, &[3.0, 4.0], &[0.0, 0.0], 2.0, &auto()).unwrap();
        assert_relative_eq!(r.value, 5.0, max_relative = 1e-14);
        assert_eq!(r.method, NormMethod::ClosedForm);
        let r = coefficient_norm(&g, &[1.0, 0.0], 4.0, &auto()).unwrap();
        assert_relative_eq!(r.value, 3f64.powf(0.25), max_relative = 1e-13);
        let r = coefficient_norm(&g, &[0.0, 1.0], 1.0, &auto()).unwrap();
        assert_relative_eq!(r.value, (2.0 / PI).sqrt(), max_relative = 1e-13);
    }

    #[test]
    fn rademacher_enumeration() {
        let e = ProcessSpec::iid(DistributionModel::rademacher(), 2);
        let r = increment_norm(&e, &[1.0, 1.0], &[0.0, 0.0], 4.0, &auto()).unwrap();
        assert_relative_eq!(r.value, 8f64.powf(0.25), max_relative = 1e-14);
        assert_eq!(r.method, NormMethod::Enumeration);
        assert_eq!(r.error_bound, 0.0);
    }

    #[test]
    fn identical_points_have_zero_distance() {
        let e = ProcessSpec::iid(DistributionModel::sym_exponential(), 3);
        let r = increment_norm(&e, &[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0], 3.0, &auto()).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn order_below_one_is_rejected() {
        let g = ProcessSpec::iid(DistributionModel::gaussian(), 1);
        assert!(coefficient_norm(&g, &[1.0], 0.5, &auto()).is_err());
    }

    #[test]
    fn forced_enumeration_cap() {
        let e = ProcessSpec::iid(DistributionModel::rademacher(), 25);
        let opts = NormOptions { choice: MethodChoice::Forced(NormMethod::Enumeration), ..auto() };
        assert!(matches!(coefficient_norm(&e, &[1.0; 25], 2.0, &opts), Err(Error::Resource(_))));
        // above the auto threshold, even orders fall back to the exact expansion
        let r = coefficient_norm(&e, &[1.0; 25], 4.0, &auto()).unwrap();
        assert_eq!(r.method, NormMethod::MomentExpansion);
        assert_relative_eq!(r.value, (3.0 * 625.0 - 2.0 * 25.0f64).powf(0.25), max_relative = 1e-12);
    }

    #[test]
    fn laplace_routes_agree() {
        let proc = ProcessSpec::iid(DistributionModel::sym_exponential(), 3);
        let a = [0.5, -1.0, 2.0];
        // the sum's first absolute moment by quadrature vs Monte Carlo
        let q = coefficient_norm(&proc, &a, 1.0, &auto()).unwrap();
        assert_eq!(q.method, NormMethod::Quadrature);
        let opts = NormOptions {
            choice: MethodChoice::Forced(NormMethod::MonteCarlo),
            mc_samples: 200_000,
            stream: RngStream::new(5, 1),
        };
        let mc = coefficient_norm(&proc, &a, 1.0, &opts).unwrap();
        assert!((q.value - mc.value).abs() <= mc.error_bound + q.error_bound, "{q:?} {mc:?}");
        // single coordinate: E|X| = 1/√2
        let one = ProcessSpec::iid(DistributionModel::sym_exponential(), 1);
        let r = coefficient_norm(&one, &[1.0], 1.0, &auto()).unwrap();
        assert_relative_eq!(r.value, 1.0 / 2f64.sqrt(), max_relative = 1e-10);
        // even orders: E X⁴ = 4!/4 = 6 for the unit-variance Laplace law
        let r = coefficient_norm(&one, &[1.0], 4.0, &auto()).unwrap();
        assert_eq!(r.method, NormMethod::MomentExpansion);
        assert_relative_eq!(r.value, 6f64.powf(0.25), max_relative = 1e-12);
    }

    #[test]
    fn expansion_matches_enumeration_for_three_point() {
        let proc = ProcessSpec::new(vec![
            DistributionModel::three_point(3.0).unwrap(),
            DistributionModel::rademacher(),
            DistributionModel::three_point(1.5).unwrap(),
        ])
        .unwrap();
        let a = [0.3, -1.2, 0.7];
        for p in [2.0, 4.0, 8.0] {
            let en = coefficient_norm(&proc, &a, p, &auto()).unwrap();
            let ex = coefficient_norm(
                &proc,
                &a,
                p,
                &NormOptions { choice: MethodChoice::Forced(NormMethod::MomentExpansion), ..auto() },
            )
            .unwrap();
            assert_relative_eq!(en.value, ex.value, max_relative = 1e-12);
        }
    }

    #[test]
    fn monte_carlo_is_reproducible() {
        let proc = ProcessSpec::iid(DistributionModel::sym_weibull(1.5).unwrap(), 2);
        let opts = NormOptions { mc_samples: 5000, stream: RngStream::new(1, 2), ..auto() };
        let a = coefficient_norm(&proc, &[1.0, 1.0], 3.0, &opts).unwrap();
        let b = coefficient_norm(&proc, &[1.0, 1.0], 3.0, &opts).unwrap();
        assert_eq!(a.method, NormMethod::MonteCarlo);
        assert_eq!(a, b);
        assert!(a.error_bound > 0.0);
    }
}
