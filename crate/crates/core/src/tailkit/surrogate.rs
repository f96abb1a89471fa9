use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::dist::{check_alpha_regular, check_speed_beta, require, DistributionModel, DEFAULT_P_GRID};
use crate::error::{domain, Error, Result};
use crate::metric::ProcessSpec;
use crate::stochlab::RngStream;

use super::constants::{check_moderate_growth_on, growth_constant, regularity_constants, GrowthCheck, RegularityConstants};
use super::envelope::envelope_for;
use super::tail::TailFunction;

/// Per-coordinate pieces of the surrogate construction.
#[derive(Debug, Clone)]
pub struct SurrogateCoordinate {
    pub model: DistributionModel,
    /// Convex envelope `M` of the coordinate's tail exponent.
    pub envelope: TailFunction<f64>,
    /// `M(t_α)`.
    pub m_at_t_alpha: f64,
    /// `λ = M(t_α)/t_α`.
    pub lambda: f64,
    /// `p = e^{−M(t_α)} = P(|Y| > t_α)`.
    pub p: f64,
}

/// Surrogate variables built from a regular process.
///
/// Per coordinate: `X̃ = sgn(X) max(|X|, T_α)`; `Y` with `P(|Y| > t) = e^{−M(t)}`;
/// `U` truncated exponential on `[0, t_α]` with rate `λ`; `Z = Y` when `|Y| > t_α`, else `U`.
/// `M̃(t) = −ln P(|Z| > t)` is `λt` up to `t_α` and `M` beyond.
#[derive(Debug, Clone)]
pub struct SurrogateFamily {
    pub constants: RegularityConstants<f64>,
    pub beta: f64,
    /// `t_α = L_α max(2, T_α)`.
    pub t_alpha: f64,
    /// `γ = C(α, β, 2L_α)`.
    pub gamma: f64,
    /// `γ̃ = max(2, γ)`.
    pub gamma_tilde: f64,
    pub coords: Vec<SurrogateCoordinate>,
}

/// One coupled draw of `(X, X̃, Y, U, Z)` for a single coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoupledDraw {
    pub x: f64,
    pub x_tilde: f64,
    pub y: f64,
    pub u: f64,
    pub z: f64,
}

/// Builds the surrogate family; every coordinate must pass `R_α` and `S_β` on the default grid.
pub fn build_surrogates(proc: &ProcessSpec, alpha: f64, beta: f64) -> Result<SurrogateFamily> {
    let k = regularity_constants(alpha)?;
    let t_alpha = k.dilation * k.threshold.max(2.0);
    let gamma = growth_constant(alpha, beta, 2.0 * k.dilation)?.c;
    let mut distinct: Vec<(DistributionModel, TailFunction<f64>)> = Vec::new();
    let mut coords = Vec::with_capacity(proc.dimension());
    for (i, model) in proc.models().iter().enumerate() {
        let envelope = match distinct.iter().find(|(m, _)| m == model) {
            Some((_, env)) => env.clone(),
            None => {
                require(check_alpha_regular(model, alpha, &DEFAULT_P_GRID)?)?;
                require(check_speed_beta(model, beta, &DEFAULT_P_GRID)?)?;
                let env = envelope_for(model, &k)?;
                distinct.push((model.clone(), env.clone()));
                env
            }
        };
        let m_at = envelope.value(t_alpha);
        if !(m_at > 0.0) || !m_at.is_finite() {
            return Err(Error::DegenerateEnvelope { coordinate: i });
        }
        coords.push(SurrogateCoordinate {
            model: model.clone(),
            envelope,
            m_at_t_alpha: m_at,
            lambda: m_at / t_alpha,
            p: (-m_at).exp(),
        });
    }
    Ok(SurrogateFamily { constants: k, beta, t_alpha, gamma, gamma_tilde: gamma.max(2.0), coords })
}

impl SurrogateFamily {
    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    fn coord(&self, i: usize) -> Result<&SurrogateCoordinate> {
        match self.coords.get(i) {
            Some(c) => Ok(c),
            None => domain(format!("coordinate {i} out of range")),
        }
    }

    /// Tail exponent of `X̃`: 0 below `T_α`, `N` from there on.
    pub fn x_tilde_tail(&self, i: usize) -> Result<TailFunction<f64>> {
        let model = self.coord(i)?.model.clone();
        let threshold = self.constants.threshold;
        Ok(TailFunction::analytic(
            move |t| if t < threshold { 0.0 } else { model.tail_value(t).unwrap_or(f64::INFINITY) },
            self.coords[i].model.support_bound().max(threshold),
        ))
    }

    /// `M̃`: `λt` on `[0, t_α]`, `M` beyond.
    pub fn tilde_tail(&self, i: usize) -> Result<TailFunction<f64>> {
        let c = self.coord(i)?.clone();
        let t_alpha = self.t_alpha;
        let support = c.envelope.support_bound();
        Ok(TailFunction::analytic(move |t| if t <= t_alpha { c.lambda * t } else { c.envelope.value(t) }, support))
    }

    /// Tail exponent of `|Z|`; identical to [`Self::tilde_tail`].
    pub fn z_tail(&self, i: usize) -> Result<TailFunction<f64>> {
        self.tilde_tail(i)
    }

    /// `P(|U| > t)`.
    pub fn u_survival(&self, i: usize, t: f64) -> Result<f64> {
        let c = self.coord(i)?;
        Ok(if t < 0.0 {
            1.0
        } else if t > self.t_alpha {
            0.0
        } else {
            ((-c.lambda * t).exp() - c.p).max(0.0) / (1.0 - c.p)
        })
    }

    /// `E|Z| ≥ (t_α / M(t_α)) (1 − e^{−M(t_α)})`.
    pub fn z_abs_mean_lower_bound(&self, i: usize) -> Result<f64> {
        let c = self.coord(i)?;
        Ok(self.t_alpha / c.m_at_t_alpha * -(-c.m_at_t_alpha).exp_m1())
    }

    /// Grid check of `M̃(2t) ≤ γ̃ M̃(t)` on `[t_α·1e−6, 100·t_α]`.
    pub fn tilde_growth_check(&self, i: usize, points: usize) -> Result<GrowthCheck<f64>> {
        let tail = self.tilde_tail(i)?;
        let scale = self.t_alpha * 1e-6;
        // the growth check expects t ≥ 2; rescaling the argument leaves M̃(2t)/M̃(t) unchanged
        let rescaled = TailFunction::analytic(move |s: f64| tail.value(s * scale / 2.0), f64::INFINITY);
        check_moderate_growth_on(&rescaled, 2.0, self.gamma_tilde, 2.0, 2.0e8, points)
    }

    /// One coupled draw for coordinate `i`.
    ///
    /// `X` and `Y` share an Exp(1) level `E` and a sign: `|X| = N⁻¹(E)`, `|Y| = M⁻¹(E)`.
    /// Since `M ≤ N`, `|Y| ≥ max(T_α, |X|) = |X̃|`; `U` uses its own uniform and sign.
    pub fn draw_coupled<R: Rng + ?Sized>(&self, i: usize, rng: &mut R) -> Result<CoupledDraw> {
        let c = self.coord(i)?;
        let e: f64 = rng.sample(Exp1);
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let abs_x = c.model.abs_from_exponential(e);
        let abs_y = c.envelope.inverse(e);
        let v: f64 = 1.0 - rng.random::<f64>();
        let abs_u = (-(c.p + (1.0 - c.p) * v).ln() / c.lambda).clamp(0.0, self.t_alpha);
        let u_sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let y = sign * abs_y;
        let u = u_sign * abs_u;
        Ok(CoupledDraw {
            x: sign * abs_x,
            x_tilde: sign * abs_x.max(self.constants.threshold),
            y,
            u,
            z: if abs_y > self.t_alpha { y } else { u },
        })
    }

    /// `count` coupled draws of coordinate `i` from `stream`.
    pub fn sample(&self, i: usize, stream: RngStream, count: usize) -> Result<Vec<CoupledDraw>> {
        let mut rng = stream.rng();
        (0..count).map(|_| self.draw_coupled(i, &mut rng)).collect()
    }
}
