use alloc::vec::Vec;

use num_traits::Float;

use super::FiniteGammaConvolution;
use crate::specfun::{gamma_p_unchecked, ln_gamma_unchecked};
use crate::{Error, Result};

const MAX_TERMS: usize = 20_000;
const MASS_TOLERANCE: f64 = 4e-15;

/// Density and CDF of `τ + Σ Gamma(α_i, β_i)` as a positive mixture of gamma
/// laws sharing the smallest scale (Moschopoulos, 1985):
///
/// `f(τ + y) = Σ_k p_k · Gamma(ρ + k, β_min)(y)`, `ρ = Σ α_i`, `Σ p_k = 1`.
///
/// The weights are computed once and truncated when the leftover mass
/// `1 - Σ p_k` is at rounding level.
#[derive(Debug, Clone)]
pub struct GammaSumSeries {
    tau: f64,
    rho: f64,
    scale: f64,
    weights: Vec<f64>,
    // ln p_k - lnΓ(ρ+k) - (ρ+k) ln β_min
    ln_coef: Vec<f64>,
    // lnΓ(ρ+k)
    ln_gammas: Vec<f64>,
}

impl GammaSumSeries {
    pub fn new(conv: &FiniteGammaConvolution) -> Result<Self> {
        let scale = conv.min_scale();
        let rho = conv.shape_sum();
        let ln_c: f64 = conv.components().iter().map(|c| c.alpha * (scale / c.beta).ln()).sum();
        if ln_c < -690.0 {
            return Err(Error::SeriesTruncation { terms: 0, remainder: 1.0 });
        }
        let ratios: Vec<(f64, f64)> = conv
            .components()
            .iter()
            .filter(|c| c.beta != scale)
            .map(|c| (c.alpha, 1.0 - scale / c.beta))
            .collect();

        let mut weights = alloc::vec![ln_c.exp()];
        let mut gammas: Vec<f64> = alloc::vec![0.0];
        let mut sum = weights[0];
        let mut compensation = 0.0;
        let mut remainder = 1.0 - sum;
        while remainder > MASS_TOLERANCE {
            let k = weights.len();
            if k >= MAX_TERMS {
                return Err(Error::SeriesTruncation { terms: k, remainder });
            }
            let gamma_k = ratios.iter().map(|&(alpha, r)| alpha * r.powi(k as i32)).sum::<f64>() / k as f64;
            gammas.push(gamma_k);
            let mut acc = 0.0;
            for i in 1..=k {
                acc += i as f64 * gammas[i] * weights[k - i];
            }
            let w = acc / k as f64;
            weights.push(w);
            // Neumaier summation of the weights.
            let t = sum + w;
            if sum.abs() >= w.abs() {
                compensation += (sum - t) + w;
            } else {
                compensation += (w - t) + sum;
            }
            sum = t;
            remainder = 1.0 - (sum + compensation);
            if remainder < 1e-12 && w < 1e-22 {
                break;
            }
        }

        let ln_scale = scale.ln();
        let ln_gammas: Vec<f64> = (0..weights.len()).map(|k| ln_gamma_unchecked(rho + k as f64)).collect();
        let ln_coef = weights
            .iter()
            .zip(&ln_gammas)
            .enumerate()
            .map(|(k, (&w, &lg))| w.ln() - lg - (rho + k as f64) * ln_scale)
            .collect();
        Ok(GammaSumSeries { tau: conv.tau(), rho, scale, weights, ln_coef, ln_gammas })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Number of retained mixture terms.
    pub fn terms(&self) -> usize {
        self.weights.len()
    }

    /// Mixture weights `p_k`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let y = x - self.tau;
        if !(y >= 0.0) {
            return 0.0;
        }
        if y == 0.0 {
            return if self.rho < 1.0 {
                f64::INFINITY
            } else if self.rho == 1.0 {
                self.weights[0] / self.scale
            } else {
                0.0
            };
        }
        let ln_y = y.ln();
        let decay = y / self.scale;
        let mut max = f64::NEG_INFINITY;
        let logs: Vec<f64> = self
            .ln_coef
            .iter()
            .enumerate()
            .map(|(k, &c)| {
                let l = c + (self.rho + k as f64 - 1.0) * ln_y - decay;
                if l > max {
                    max = l;
                }
                l
            })
            .collect();
        if max == f64::NEG_INFINITY {
            return 0.0;
        }
        let total: f64 = logs.iter().map(|&l| (l - max).exp()).sum();
        (max + total.ln()).exp()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let y = x - self.tau;
        if !(y > 0.0) {
            return 0.0;
        }
        if y == f64::INFINITY {
            return 1.0;
        }
        let z = y / self.scale;
        let ln_z = z.ln();
        let top = self.weights.len() - 1;
        let mut p = gamma_p_unchecked(self.rho + top as f64, z);
        let mut total = self.weights[top] * p;
        for k in (0..top).rev() {
            // P(a, z) = P(a + 1, z) + z^a e^{-z} / Γ(a + 1), a = ρ + k
            let a = self.rho + k as f64;
            p += (a * ln_z - z - self.ln_gammas[k + 1]).exp();
            total += self.weights[k] * p.min(1.0);
        }
        total.clamp(0.0, 1.0)
    }
}

/// Upper bound `C x^{ρ-1} e^{-x(1-v)/β_min} / (β_min^ρ Γ(ρ))` on the density
/// of `Σ Gamma(α_i, β_i)` with `C = Π (β_min/β_i)^{α_i}` and
/// `v = max_{β_i ≠ β_min} (1 - β_min/β_i)`.
///
/// Requires zero drift and at least two distinct scales.
pub fn moschopoulos_bound(conv: &FiniteGammaConvolution, x: f64) -> Result<f64> {
    if conv.tau() != 0.0 {
        return Err(Error::Precondition("the density bound needs zero drift"));
    }
    if conv.components().len() < 2 {
        return Err(Error::Precondition("the density bound needs at least two distinct scales"));
    }
    if !(x > 0.0) {
        return Err(Error::Domain { function: "moschopoulos_bound", arg: x });
    }
    let scale = conv.min_scale();
    let rho = conv.shape_sum();
    let ln_c: f64 = conv.components().iter().map(|c| c.alpha * (scale / c.beta).ln()).sum();
    // Components are sorted by decreasing scale, so the largest ratio is first.
    let v = 1.0 - scale / conv.max_scale();
    let ln_bound = ln_c - rho * scale.ln() - ln_gamma_unchecked(rho) + (rho - 1.0) * x.ln() - x * (1.0 - v) / scale;
    Ok(ln_bound.exp())
}
