//! Mixing laws: finite gamma convolutions, GIG, and atomic GGC generators.

mod gig;
mod series;
mod thorin;

use alloc::format;
use alloc::vec::Vec;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::specfun::{ln_bessel_k_unchecked, ln_gamma_unchecked};
use crate::{Error, ExtendedReal, Result};

pub use gig::GigShape;
pub use series::{moschopoulos_bound, GammaSumSeries};
pub use thorin::{ThorinAtom, ThorinPair};

/// `Gamma(alpha, scale = beta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaComponent {
    pub alpha: f64,
    pub beta: f64,
}

/// Law of `τ + Σ ξ_i` with independent `ξ_i ~ Gamma(α_i, scale β_i)`.
///
/// Components are sorted by decreasing scale and equal scales are merged,
/// so the i-th component maps to the i-th atom of [`as_thorin`](Self::as_thorin).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFiniteGammaConvolution")]
pub struct FiniteGammaConvolution {
    tau: f64,
    components: Vec<GammaComponent>,
}

#[derive(Deserialize)]
struct RawFiniteGammaConvolution {
    #[serde(default)]
    tau: f64,
    components: Vec<GammaComponent>,
}

impl TryFrom<RawFiniteGammaConvolution> for FiniteGammaConvolution {
    type Error = Error;

    fn try_from(raw: RawFiniteGammaConvolution) -> Result<Self> {
        FiniteGammaConvolution::new(raw.tau, raw.components)
    }
}

impl FiniteGammaConvolution {
    pub fn new(tau: f64, components: Vec<GammaComponent>) -> Result<Self> {
        if !(tau >= 0.0) || !tau.is_finite() {
            return Err(Error::invalid("tau", "must be finite and nonnegative"));
        }
        if components.is_empty() {
            return Err(Error::invalid("components", "at least one component is required"));
        }
        for (i, c) in components.iter().enumerate() {
            if !(c.alpha > 0.0) || !c.alpha.is_finite() {
                return Err(Error::invalid(format!("components[{i}].alpha"), "must be finite and positive"));
            }
            if !(c.beta > 0.0) || !c.beta.is_finite() {
                return Err(Error::invalid(format!("components[{i}].beta"), "must be finite and positive"));
            }
        }
        let mut components = components;
        components.sort_by(|a, b| b.beta.total_cmp(&a.beta));
        let mut merged: Vec<GammaComponent> = Vec::with_capacity(components.len());
        for c in components {
            match merged.last_mut() {
                Some(last) if last.beta == c.beta => last.alpha += c.alpha,
                _ => merged.push(c),
            }
        }
        Ok(FiniteGammaConvolution { tau, components: merged })
    }

    /// A single `Gamma(alpha, scale beta)` law.
    pub fn gamma(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(0.0, alloc::vec![GammaComponent { alpha, beta }])
    }

    /// Inverse of [`as_thorin`](Self::as_thorin): atom `(t, w)` becomes `Gamma(w, 1/t)`.
    pub fn from_thorin(generator: &ThorinPair) -> Result<Self> {
        let components =
            generator.atoms().iter().map(|a| GammaComponent { alpha: a.weight, beta: 1.0 / a.location }).collect();
        Self::new(generator.tau(), components)
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Components in decreasing scale order.
    pub fn components(&self) -> &[GammaComponent] {
        &self.components
    }

    pub fn shape_sum(&self) -> f64 {
        self.components.iter().map(|c| c.alpha).sum()
    }

    pub fn max_scale(&self) -> f64 {
        self.components[0].beta
    }

    pub fn min_scale(&self) -> f64 {
        self.components[self.components.len() - 1].beta
    }

    pub fn as_thorin(&self) -> ThorinPair {
        let atoms = self.components.iter().map(|c| ThorinAtom { location: 1.0 / c.beta, weight: c.alpha }).collect();
        ThorinPair::new(self.tau, atoms).expect("valid components give valid atoms")
    }
}

/// Generalized inverse Gaussian law with density proportional to
/// `x^{λ-1} exp(-(a²/x + b²x)/2)` on `x > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGig")]
pub struct Gig {
    lambda: f64,
    a: f64,
    b: f64,
}

#[derive(Deserialize)]
struct RawGig {
    lambda: f64,
    a: f64,
    b: f64,
}

impl TryFrom<RawGig> for Gig {
    type Error = Error;

    fn try_from(raw: RawGig) -> Result<Self> {
        Gig::new(raw.lambda, raw.a, raw.b)
    }
}

impl Gig {
    pub fn new(lambda: f64, a: f64, b: f64) -> Result<Self> {
        if !lambda.is_finite() {
            return Err(Error::invalid("lambda", "must be finite"));
        }
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::invalid("a", "must be finite and positive"));
        }
        if !(b > 0.0) || !b.is_finite() {
            return Err(Error::invalid("b", "must be finite and positive"));
        }
        Ok(Gig { lambda, a, b })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    fn ln_bessel_ratio(&self, shift: f64) -> f64 {
        let ab = self.a * self.b;
        ln_bessel_k_unchecked(self.lambda + shift, ab) - ln_bessel_k_unchecked(self.lambda, ab)
    }

    pub fn mean(&self) -> f64 {
        self.a / self.b * self.ln_bessel_ratio(1.0).exp()
    }

    pub fn variance(&self) -> f64 {
        let r1 = self.ln_bessel_ratio(1.0).exp();
        let r2 = self.ln_bessel_ratio(2.0).exp();
        let scale = self.a / self.b;
        scale * scale * (r2 - r1 * r1)
    }

    /// `ln E e^{-sZ}`.
    ///
    /// `E e^{-sZ} = (b²/(b²+2s))^{λ/2} K_λ(a√(b²+2s)) / K_λ(ab)` for `s > -b²/2`.
    /// At `s = -b²/2` the transform is finite when `λ < 0`.
    pub fn ln_laplace(&self, s: f64) -> ExtendedReal {
        let psi = self.b * self.b;
        let u = psi + 2.0 * s;
        if s.is_nan() {
            return ExtendedReal::Finite(f64::NAN);
        }
        if u > 0.0 {
            if s == 0.0 {
                return ExtendedReal::Finite(0.0);
            }
            // Near -b²/2 the prefactor and K_λ(z) blow up together; take both from `u`
            // so their log singularities cancel exactly.
            let lead = if u < 0.5 * psi {
                -0.5 * self.lambda * (u / psi).ln()
            } else {
                -0.5 * self.lambda * (2.0 * s / psi).ln_1p()
            };
            let z = self.a * u.sqrt();
            let ab = self.a * self.b;
            return ExtendedReal::Finite(
                lead + ln_bessel_k_unchecked(self.lambda, z) - ln_bessel_k_unchecked(self.lambda, ab),
            );
        }
        if u == 0.0 && self.lambda < 0.0 {
            let mu = -self.lambda;
            let ab = self.a * self.b;
            let value = ln_gamma_unchecked(mu) + (mu - 1.0) * core::f64::consts::LN_2
                - mu * ab.ln()
                - ln_bessel_k_unchecked(mu, ab);
            return ExtendedReal::Finite(value);
        }
        ExtendedReal::PosInf
    }
}

/// A nonnegative mixing variable `Z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MixingLaw {
    FiniteGammaConvolution(FiniteGammaConvolution),
    Gig(Gig),
    AtomicGgc { generator: ThorinPair },
}

impl From<FiniteGammaConvolution> for MixingLaw {
    fn from(law: FiniteGammaConvolution) -> Self {
        MixingLaw::FiniteGammaConvolution(law)
    }
}

impl From<Gig> for MixingLaw {
    fn from(law: Gig) -> Self {
        MixingLaw::Gig(law)
    }
}

impl From<ThorinPair> for MixingLaw {
    fn from(generator: ThorinPair) -> Self {
        MixingLaw::AtomicGgc { generator }
    }
}

fn ln_laplace_atoms(tau: f64, terms: impl Iterator<Item = (f64, f64)>, s: f64) -> ExtendedReal {
    // terms: (weight, scale); exponent -τs - Σ w ln(1 + scale·s)
    let mut total = -tau * s;
    for (weight, scale) in terms {
        let arg = scale * s;
        if !(arg > -1.0) {
            return if arg.is_nan() { ExtendedReal::Finite(f64::NAN) } else { ExtendedReal::PosInf };
        }
        total -= weight * arg.ln_1p();
    }
    ExtendedReal::Finite(total)
}

impl MixingLaw {
    pub fn kind_name(&self) -> &'static str {
        match self {
            MixingLaw::FiniteGammaConvolution(_) => "finite_gamma_convolution",
            MixingLaw::Gig(_) => "gig",
            MixingLaw::AtomicGgc { .. } => "atomic_ggc",
        }
    }

    /// `ln E e^{-sZ}`; `PosInf` where the transform diverges.
    pub fn ln_laplace(&self, s: f64) -> ExtendedReal {
        match self {
            MixingLaw::FiniteGammaConvolution(conv) => {
                ln_laplace_atoms(conv.tau, conv.components.iter().map(|c| (c.alpha, c.beta)), s)
            }
            MixingLaw::Gig(gig) => gig.ln_laplace(s),
            MixingLaw::AtomicGgc { generator } => {
                // ln(1 + s/t) with s/t formed directly to keep the atom form exact.
                let mut total = -generator.tau() * s;
                for atom in generator.atoms() {
                    let arg = s / atom.location;
                    if !(arg > -1.0) {
                        return if arg.is_nan() { ExtendedReal::Finite(f64::NAN) } else { ExtendedReal::PosInf };
                    }
                    total -= atom.weight * arg.ln_1p();
                }
                ExtendedReal::Finite(total)
            }
        }
    }

    /// `E e^{-sZ}`; `PosInf` where the transform diverges.
    pub fn laplace(&self, s: f64) -> ExtendedReal {
        self.ln_laplace(s).exp()
    }

    pub fn mean(&self) -> f64 {
        match self {
            MixingLaw::FiniteGammaConvolution(conv) => {
                conv.tau + conv.components.iter().map(|c| c.alpha * c.beta).sum::<f64>()
            }
            MixingLaw::Gig(gig) => gig.mean(),
            MixingLaw::AtomicGgc { generator } => {
                generator.tau() + generator.atoms().iter().map(|a| a.weight / a.location).sum::<f64>()
            }
        }
    }

    pub fn variance(&self) -> f64 {
        match self {
            MixingLaw::FiniteGammaConvolution(conv) => conv.components.iter().map(|c| c.alpha * c.beta * c.beta).sum(),
            MixingLaw::Gig(gig) => gig.variance(),
            MixingLaw::AtomicGgc { generator } => {
                generator.atoms().iter().map(|a| a.weight / (a.location * a.location)).sum()
            }
        }
    }

    /// `ŝ = inf{s : E e^{-sZ} < ∞}`, always `≤ 0`.
    pub fn integrability_number(&self) -> f64 {
        match self {
            MixingLaw::FiniteGammaConvolution(conv) => -1.0 / conv.max_scale(),
            MixingLaw::Gig(gig) => -0.5 * gig.b * gig.b,
            MixingLaw::AtomicGgc { generator } => -generator.min_location(),
        }
    }

    /// Left end of the support (the drift `τ`; zero for GIG).
    pub fn support_start(&self) -> f64 {
        match self {
            MixingLaw::FiniteGammaConvolution(conv) => conv.tau,
            MixingLaw::Gig(_) => 0.0,
            MixingLaw::AtomicGgc { generator } => generator.tau(),
        }
    }

    /// Exact Thorin generator of a gamma-type law.
    pub fn as_thorin(&self) -> Result<ThorinPair> {
        match self {
            MixingLaw::FiniteGammaConvolution(conv) => Ok(conv.as_thorin()),
            MixingLaw::AtomicGgc { generator } => Ok(generator.clone()),
            MixingLaw::Gig(_) => Err(Error::UnsupportedLaw { operation: "Thorin generator", law: "gig" }),
        }
    }

    /// `∫_(0, δ] ν(dt) / t` of the Thorin measure `ν`.
    pub fn thorin_partial_mean(&self, delta: f64) -> Result<f64> {
        if !(delta > 0.0) {
            return Err(Error::invalid("delta", "must be positive"));
        }
        match self {
            MixingLaw::Gig(_) => Err(Error::UnsupportedLaw { operation: "thorin_partial_mean", law: "gig" }),
            MixingLaw::AtomicGgc { generator } => Ok(generator.partial_mean(delta)),
            MixingLaw::FiniteGammaConvolution(conv) => Ok(conv
                .components
                .iter()
                .filter(|c| 1.0 / c.beta <= delta)
                .map(|c| c.alpha * c.beta)
                .sum()),
        }
    }

    /// Reusable density/CDF evaluator.
    pub fn evaluator(&self) -> Result<DensityEvaluator> {
        let conv = match self {
            MixingLaw::Gig(gig) => return Ok(DensityEvaluator::Gig(GigShape::new(gig))),
            MixingLaw::FiniteGammaConvolution(conv) => conv.clone(),
            MixingLaw::AtomicGgc { generator } => FiniteGammaConvolution::from_thorin(generator)?,
        };
        Ok(DensityEvaluator::GammaSum(GammaSumSeries::new(&conv)?))
    }

    /// Density at `x`; zero left of the support.
    pub fn density(&self, x: f64) -> Result<f64> {
        Ok(self.evaluator()?.pdf(x))
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        Ok(self.evaluator()?.cdf(x))
    }
}

/// Density and CDF of a mixing law with per-law setup done once.
#[derive(Debug, Clone)]
pub enum DensityEvaluator {
    GammaSum(GammaSumSeries),
    Gig(GigShape),
}

impl DensityEvaluator {
    pub fn pdf(&self, x: f64) -> f64 {
        match self {
            DensityEvaluator::GammaSum(series) => series.pdf(x),
            DensityEvaluator::Gig(shape) => shape.pdf(x),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            DensityEvaluator::GammaSum(series) => series.cdf(x),
            DensityEvaluator::Gig(shape) => shape.cdf(x),
        }
    }

    /// CDF at ascending points; GIG shares one cumulative integration pass.
    pub fn cdf_sorted(&self, xs: &[f64]) -> Vec<f64> {
        match self {
            DensityEvaluator::GammaSum(series) => xs.iter().map(|&x| series.cdf(x)).collect(),
            DensityEvaluator::Gig(shape) => shape.cdf_sorted(xs),
        }
    }

    pub fn support_start(&self) -> f64 {
        match self {
            DensityEvaluator::GammaSum(series) => series.tau(),
            DensityEvaluator::Gig(_) => 0.0,
        }
    }
}
