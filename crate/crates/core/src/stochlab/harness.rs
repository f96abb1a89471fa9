use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dist::DistributionModel;
use crate::error::{domain, Result};
use crate::metric::{coefficient_norm, IncrementNormResult, IndexSet, NormOptions, ProcessSpec};

use super::engine::{draw_process, run_chunks, SparseRows};
use super::rng::RngStream;
use super::sup::{check_inputs, SupTarget, SupremumEstimate};

/// Law of a nonnegative `S`: finite support `(value, probability)` or a sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NonnegativeLaw {
    Discrete(Vec<(f64, f64)>),
    Sampled(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PaleyZygmundReport {
    pub lambda: f64,
    /// `P(S ≥ λ E S)`.
    pub lhs: f64,
    /// `(1−λ)² (E S)² / E S²`.
    pub rhs: f64,
    pub exact: bool,
    pub pass: bool,
}

/// `P(S ≥ λ E S) ≥ (1−λ)² (E S)² / E S²`; exact for a discrete law, empirical for a sample.
pub fn paley_zygmund_check(law: &NonnegativeLaw, lambda: f64) -> Result<PaleyZygmundReport> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return domain("lambda must lie in (0, 1)");
    }
    let (points, exact): (Vec<(f64, f64)>, bool) = match law {
        NonnegativeLaw::Discrete(atoms) => {
            let total: f64 = atoms.iter().map(|a| a.1).sum();
            if atoms.iter().any(|a| a.1 < 0.0) || (total - 1.0).abs() > 1e-12 {
                return domain("discrete law must have nonnegative weights summing to 1");
            }
            (atoms.clone(), true)
        }
        NonnegativeLaw::Sampled(xs) => {
            if xs.is_empty() {
                return domain("empty sample");
            }
            let w = 1.0 / xs.len() as f64;
            (xs.iter().map(|&x| (x, w)).collect(), false)
        }
    };
    if points.iter().any(|a| a.0 < 0.0 || !a.0.is_finite()) {
        return domain("S must be finite and nonnegative");
    }
    let m1: f64 = points.iter().map(|(x, w)| x * w).sum();
    let m2: f64 = points.iter().map(|(x, w)| x * x * w).sum();
    let lhs: f64 = points.iter().filter(|(x, _)| *x >= lambda * m1).map(|a| a.1).sum();
    let rhs = if m2 > 0.0 { (1.0 - lambda).powi(2) * m1 * m1 / m2 } else { 0.0 };
    Ok(PaleyZygmundReport { lambda, lhs, rhs, exact, pass: lhs >= rhs })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    pub p: f64,
    pub norm_a: IncrementNormResult,
    pub norm_b: IncrementNormResult,
    pub norms_ok: bool,
    pub esup_a: Option<SupremumEstimate>,
    pub esup_b: Option<SupremumEstimate>,
    /// Standard error of the paired difference `sup_a − sup_b`.
    pub paired_stderr: Option<f64>,
    pub sup_ok: Option<bool>,
}

impl ContractionReport {
    pub fn pass(&self) -> bool {
        self.norms_ok && self.sup_ok.unwrap_or(true)
    }
}

/// `‖Σ aᵢεᵢ‖_p ≤ ‖Σ bᵢεᵢ‖_p` for `|aᵢ| ≤ |bᵢ|`, and optionally
/// `E sup_t Σ tᵢaᵢεᵢ ≤ E sup_t Σ tᵢbᵢεᵢ` with shared signs.
pub fn contraction_check(
    a: &[f64],
    b: &[f64],
    p: f64,
    set: Option<&IndexSet>,
    samples: usize,
    stream: RngStream,
) -> Result<ContractionReport> {
    if a.len() != b.len() || a.is_empty() {
        return domain("coefficient vectors must be nonempty and of equal length");
    }
    if let Some((i, _)) = a.iter().zip(b).enumerate().find(|(_, (x, y))| x.abs() > y.abs()) {
        return domain(format!("contraction needs |a_i| <= |b_i|; fails at coordinate {i}"));
    }
    let proc = ProcessSpec::iid(DistributionModel::rademacher(), a.len());
    let opts = NormOptions { stream: stream.child(0), ..NormOptions::default() };
    let norm_a = coefficient_norm(&proc, a, p, &opts)?;
    let norm_b = coefficient_norm(&proc, b, p, &opts)?;
    let norms_ok = norm_a.value <= norm_b.value * (1.0 + 1e-12) + norm_a.error_bound + norm_b.error_bound;
    let mut report =
        ContractionReport { p, norm_a, norm_b, norms_ok, esup_a: None, esup_b: None, paired_stderr: None, sup_ok: None };
    if let Some(set) = set {
        check_inputs(&proc, set, samples)?;
        let scale = |c: &[f64]| {
            let pts = set.points().iter().map(|t| t.iter().zip(c).map(|(x, y)| x * y).collect()).collect();
            IndexSet::new(set.dim(), pts)
        };
        let (ra, rb) = (SparseRows::new(&scale(a)?), SparseRows::new(&scale(b)?));
        let mc = stream.child(1);
        let s = run_chunks(samples, mc, 3, |rng, out| {
            let eps: Vec<f64> = (0..a.len()).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
            let (mut va, mut vb) = (Vec::new(), Vec::new());
            ra.values(&eps, &mut va);
            rb.values(&eps, &mut vb);
            out[0] = SupTarget::MaxOnly.apply(&va);
            out[1] = SupTarget::MaxOnly.apply(&vb);
            out[2] = out[0] - out[1];
        });
        report.esup_a = Some(SupremumEstimate::from_summary(s[0], mc, SupTarget::MaxOnly));
        report.esup_b = Some(SupremumEstimate::from_summary(s[1], mc, SupTarget::MaxOnly));
        report.paired_stderr = Some(s[2].stderr);
        report.sup_ok = Some(s[2].mean <= 3.0 * s[2].stderr + 1e-12);
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetrizationPair {
    pub s: usize,
    pub t: usize,
    pub norm_x: f64,
    pub norm_tilde: f64,
    pub ratio: f64,
    /// 3σ band on the ratio from the delta method.
    pub ratio_band: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetrizationReport {
    pub p: f64,
    pub pairs: Vec<SymmetrizationPair>,
    pub esup_x: SupremumEstimate,
    pub esup_tilde: SupremumEstimate,
    /// `2 E sup_t X̃_t`, estimated on the same draws as `esup_tilde`.
    pub twice_sup_tilde: SupremumEstimate,
    pub identity_stderr: f64,
    pub norms_ok: bool,
    pub sup_bracket_ok: bool,
    pub identity_ok: bool,
}

impl SymmetrizationReport {
    pub fn pass(&self) -> bool {
        self.norms_ok && self.sup_bracket_ok && self.identity_ok
    }
}

/// Compares `X` with `X̃_t = Σ tᵢεᵢXᵢ` on every pair of `T` and on `E sup`, all from shared draws.
pub fn symmetrization_check(
    proc: &ProcessSpec,
    set: &IndexSet,
    p: f64,
    samples: usize,
    stream: RngStream,
) -> Result<SymmetrizationReport> {
    check_inputs(proc, set, samples)?;
    if !(p >= 1.0) {
        return domain("moment order must be >= 1");
    }
    let m = set.len();
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|i| (0..i).map(move |j| (j, i))).collect();
    let rows = SparseRows::new(set);
    let n = proc.dimension();
    let k = 2 * pairs.len() + 4;
    let s = run_chunks(samples, stream, k, |rng, out| {
        let mut x = vec![0.0; n];
        draw_process(proc, rng, &mut x);
        let xt: Vec<f64> = x.iter().map(|v| if rng.random::<bool>() { *v } else { -*v }).collect();
        let (mut vx, mut vt) = (Vec::new(), Vec::new());
        rows.values(&x, &mut vx);
        rows.values(&xt, &mut vt);
        for (slot, &(i, j)) in pairs.iter().enumerate() {
            out[2 * slot] = (vx[i] - vx[j]).abs().powf(p);
            out[2 * slot + 1] = (vt[i] - vt[j]).abs().powf(p);
        }
        let base = 2 * pairs.len();
        out[base] = SupTarget::SupIncrements.apply(&vx);
        out[base + 1] = SupTarget::SupIncrements.apply(&vt);
        out[base + 2] = 2.0 * SupTarget::MaxOnly.apply(&vt);
        out[base + 3] = out[base + 1] - out[base + 2];
    });
    let mut norms_ok = true;
    let mut rep_pairs = Vec::with_capacity(pairs.len());
    for (slot, &(i, j)) in pairs.iter().enumerate() {
        let (mx, mt) = (s[2 * slot], s[2 * slot + 1]);
        if mx.mean == 0.0 {
            continue;
        }
        let norm_x = mx.mean.powf(1.0 / p);
        let norm_tilde = mt.mean.powf(1.0 / p);
        let ratio = norm_tilde / norm_x;
        // relative 3σ error of each norm is stderr/(p·mean)
        let band = 3.0 * ratio * (mx.stderr / mx.mean + mt.stderr / mt.mean) / p;
        if !(ratio >= 0.5 - band && ratio <= 2.0 + band) {
            norms_ok = false;
        }
        rep_pairs.push(SymmetrizationPair { s: i, t: j, norm_x, norm_tilde, ratio, ratio_band: band });
    }
    let base = 2 * pairs.len();
    let est = |idx: usize, target| SupremumEstimate::from_summary(s[idx], stream, target);
    let (ex, et, e2) =
        (est(base, SupTarget::SupIncrements), est(base + 1, SupTarget::SupIncrements), est(base + 2, SupTarget::MaxOnly));
    let slack = 3.0 * (ex.stderr + et.stderr);
    let sup_bracket_ok = 0.5 * ex.mean <= et.mean + slack && et.mean <= 2.0 * ex.mean + slack;
    let identity_stderr = s[base + 3].stderr;
    let identity_ok = s[base + 3].mean.abs() <= 3.0 * identity_stderr + 1e-12;
    Ok(SymmetrizationReport {
        p,
        pairs: rep_pairs,
        esup_x: ex,
        esup_tilde: et,
        twice_sup_tilde: e2,
        identity_stderr,
        norms_ok,
        sup_bracket_ok,
        identity_ok,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::normal_cdf;

    #[test]
    fn pz_examples() {
        let r = paley_zygmund_check(&NonnegativeLaw::Discrete(vec![(1.0, 1.0)]), 0.5).unwrap();
        assert_eq!((r.lhs, r.rhs, r.pass), (1.0, 0.25, true));
        let r = paley_zygmund_check(&NonnegativeLaw::Discrete(vec![(0.0, 0.5), (2.0, 0.5)]), 0.5).unwrap();
        assert_eq!((r.lhs, r.rhs, r.pass, r.exact), (0.5, 0.125, true, true));
        assert!(paley_zygmund_check(&NonnegativeLaw::Discrete(vec![(1.0, 1.0)]), 1.0).is_err());
    }

    #[test]
    fn pz_gaussian_square() {
        let g = DistributionModel::gaussian().sample(RngStream::new(8, 0), 200_000);
        let r = paley_zygmund_check(&NonnegativeLaw::Sampled(g.iter().map(|x| x * x).collect()), 0.5).unwrap();
        let exact = 2.0 * (1.0 - normal_cdf(0.5f64.sqrt()));
        assert!((r.lhs - exact).abs() < 0.005);
        assert!((r.rhs - 1.0 / 12.0).abs() < 0.005);
        assert!(r.pass);
    }

    #[test]
    fn contraction_examples() {
        let r = contraction_check(&[1.0, 0.0], &[1.0, 1.0], 2.0, None, 1000, RngStream::new(0, 0)).unwrap();
        assert!((r.norm_a.value - 1.0).abs() < 1e-15 && (r.norm_b.value - 2f64.sqrt()).abs() < 1e-15);
        assert!(r.pass());
        let same = contraction_check(&[0.5, -2.0], &[0.5, -2.0], 4.0, None, 1000, RngStream::new(0, 0)).unwrap();
        assert_eq!(same.norm_a, same.norm_b);
        assert!(contraction_check(&[2.0], &[1.0], 2.0, None, 1000, RngStream::new(0, 0)).is_err());
        let set = IndexSet::new(2, vec![vec![1.0, -1.0], vec![0.5, 2.0], vec![-1.0, 0.0]]).unwrap();
        let r = contraction_check(&[0.5, -1.0], &[1.0, 1.5], 2.0, Some(&set), 20_000, RngStream::new(6, 0)).unwrap();
        assert!(r.pass(), "{r:?}");
    }

    #[test]
    fn symmetric_models_give_ratio_near_one() {
        let proc = ProcessSpec::iid(DistributionModel::gaussian(), 3);
        let set = IndexSet::new(3, vec![vec![1.0, 0.0, 0.5], vec![0.0, 1.0, -1.0], vec![0.3, 0.3, 0.3]]).unwrap();
        let r = symmetrization_check(&proc, &set, 2.0, 50_000, RngStream::new(9, 0)).unwrap();
        assert!(r.pass(), "{r:?}");
        for pair in &r.pairs {
            assert!((pair.ratio - 1.0).abs() < 0.05);
        }
    }
}
