//! Reproducible variate generation and Monte-Carlo expected utility.
//!
//! Draw `k` of a run with seed `s` uses its own ChaCha8 stream `k` keyed by
//! `s`, so any partition of the indices across threads gives the same values.

use alloc::vec::Vec;

use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::linalg;
use crate::mixing::{FiniteGammaConvolution, Gig, GigShape, MixingLaw};
use crate::portfolio::{MarketSpec, NmvmModel};
use crate::{Error, Result};

/// Key for the per-draw streams of one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamKey([u8; 32]);

impl StreamKey {
    pub fn new(seed: u64) -> Self {
        StreamKey(ChaCha8Rng::seed_from_u64(seed).get_seed())
    }

    /// Generator for draw `index`.
    pub fn stream(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.0);
        rng.set_stream(index);
        rng
    }
}

/// Rejection sampler for GIG in `y = ln x`.
///
/// The envelope is `e^{h(m)}` between the two points `p < m < q` where the
/// log-kernel `h` has dropped by one from its mode `m`, and the tangent lines of
/// `h` at `p` and `q` outside. Concavity of `h` makes this a valid envelope
/// with acceptance probability at least `1/(e+1)`.
#[derive(Debug, Clone)]
pub struct GigSampler {
    shape: GigShape,
    peak: f64,
    left: f64,
    right: f64,
    left_slope: f64,
    right_slope: f64,
    // cumulative envelope masses relative to e^{peak}
    mass_left: f64,
    mass_mid: f64,
    mass_total: f64,
}

impl GigSampler {
    pub fn new(gig: &Gig) -> Self {
        let shape = GigShape::new(gig);
        let peak = shape.kernel(shape.mode());
        let left = shape.level_crossing(peak - 1.0, -1.0);
        let right = shape.level_crossing(peak - 1.0, 1.0);
        let left_slope = shape.kernel_slope(left);
        let right_slope = -shape.kernel_slope(right);
        let drop = (-1.0f64).exp();
        let mass_left = drop / left_slope;
        let mass_mid = right - left;
        let mass_right = drop / right_slope;
        GigSampler {
            shape,
            peak,
            left,
            right,
            left_slope,
            right_slope,
            mass_left,
            mass_mid,
            mass_total: mass_left + mass_mid + mass_right,
        }
    }

    /// Probability that one proposal is accepted.
    pub fn acceptance_rate(&self) -> f64 {
        (self.shape.ln_norm() - self.peak).exp() / self.mass_total
    }

    /// One variate and the number of proposals it took.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, u64) {
        let mut proposals = 0;
        loop {
            proposals += 1;
            let pick = rng.random::<f64>() * self.mass_total;
            let u: f64 = 1.0 - rng.random::<f64>();
            let (y, ln_envelope) = if pick < self.mass_left {
                let y = self.left + u.ln() / self.left_slope;
                (y, self.peak - 1.0 + self.left_slope * (y - self.left))
            } else if pick < self.mass_left + self.mass_mid {
                (self.left + (pick - self.mass_left), self.peak)
            } else {
                let y = self.right - u.ln() / self.right_slope;
                (y, self.peak - 1.0 - self.right_slope * (y - self.right))
            };
            let v: f64 = 1.0 - rng.random::<f64>();
            if v.ln() <= self.shape.kernel(y) - ln_envelope {
                return (y.exp(), proposals);
            }
        }
    }
}

/// Per-law sampler set up once and reused for every draw.
#[derive(Debug, Clone)]
pub enum MixingSampler {
    /// `τ + Σ Gamma(α_i, β_i)`; atomic generators map atom `(t, w)` to `Gamma(w, 1/t)`.
    GammaSum { tau: f64, parts: Vec<Gamma<f64>> },
    Gig(GigSampler),
}

impl MixingSampler {
    pub fn new(law: &MixingLaw) -> Result<Self> {
        let conv = match law {
            MixingLaw::Gig(gig) => return Ok(MixingSampler::Gig(GigSampler::new(gig))),
            MixingLaw::FiniteGammaConvolution(conv) => conv.clone(),
            MixingLaw::AtomicGgc { generator } => FiniteGammaConvolution::from_thorin(generator)?,
        };
        let parts = conv
            .components()
            .iter()
            .map(|c| Gamma::new(c.alpha, c.beta).map_err(|_| Error::invalid("components", "invalid gamma parameters")))
            .collect::<Result<Vec<_>>>()?;
        Ok(MixingSampler::GammaSum { tau: conv.tau(), parts })
    }

    /// One variate and the number of proposals it took (1 for exact samplers).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, u64) {
        match self {
            MixingSampler::GammaSum { tau, parts } => (tau + parts.iter().map(|g| g.sample(rng)).sum::<f64>(), 1),
            MixingSampler::Gig(sampler) => sampler.sample(rng),
        }
    }

    /// Envelope acceptance probability of the rejection step, if any.
    pub fn acceptance_rate(&self) -> Option<f64> {
        match self {
            MixingSampler::GammaSum { .. } => None,
            MixingSampler::Gig(sampler) => Some(sampler.acceptance_rate()),
        }
    }
}

/// I.i.d. draws of a mixing law.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub values: Vec<f64>,
    pub seed: u64,
    pub law: MixingLaw,
    /// Accepted draws over proposals for rejection samplers.
    pub acceptance_rate: Option<f64>,
}

/// Draws `indices` of the run keyed by `seed`; returns values and proposal count.
pub fn sample_indices(
    sampler: &MixingSampler,
    key: &StreamKey,
    indices: core::ops::Range<u64>,
) -> (Vec<f64>, u64) {
    let mut proposals = 0;
    let values = indices
        .map(|k| {
            let (z, tries) = sampler.sample(&mut key.stream(k));
            proposals += tries;
            z
        })
        .collect();
    (values, proposals)
}

pub fn sample_mixing(law: &MixingLaw, n: usize, seed: u64) -> Result<SampleBatch> {
    if n == 0 {
        return Err(Error::invalid("n", "must be at least 1"));
    }
    let sampler = MixingSampler::new(law)?;
    let (values, proposals) = sample_indices(&sampler, &StreamKey::new(seed), 0..n as u64);
    let acceptance_rate = sampler.acceptance_rate().map(|_| n as f64 / proposals as f64);
    Ok(SampleBatch { values, seed, law: law.clone(), acceptance_rate })
}

/// Return vectors `X = μ + γZ + √Z A N`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct NmvmSample {
    dim: usize,
    returns: Vec<f64>,
}

impl NmvmSample {
    pub fn draw(model: &NmvmModel, n: usize, seed: u64) -> Result<Self> {
        Self::draw_indices(model, &StreamKey::new(seed), 0..n as u64)
    }

    /// Draws the given indices of the run keyed by `key`.
    pub fn draw_indices(model: &NmvmModel, key: &StreamKey, indices: core::ops::Range<u64>) -> Result<Self> {
        let sampler = MixingSampler::new(model.law())?;
        let d = model.dim();
        let a = model.a_matrix();
        let mut returns = Vec::with_capacity(d * (indices.end - indices.start) as usize);
        let mut normal = alloc::vec![0.0; d];
        for k in indices {
            let mut rng = key.stream(k);
            let (z, _) = sampler.sample(&mut rng);
            for v in normal.iter_mut() {
                *v = StandardNormal.sample(&mut rng);
            }
            let root = z.sqrt();
            for i in 0..d {
                returns.push(model.mu()[i] + model.gamma()[i] * z + root * linalg::dot(&a[i], &normal));
            }
        }
        Ok(NmvmSample { dim: d, returns })
    }

    /// Concatenates samples drawn for consecutive index ranges.
    pub fn concat(parts: Vec<NmvmSample>) -> Result<Self> {
        let dim = parts.first().map(|p| p.dim).ok_or(Error::Precondition("no sample parts"))?;
        if parts.iter().any(|p| p.dim != dim) {
            return Err(Error::DimensionMismatch("sample parts of different dimension"));
        }
        let returns = parts.into_iter().flat_map(|p| p.returns).collect();
        Ok(NmvmSample { dim, returns })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.returns.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.returns.is_empty()
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.returns.chunks_exact(self.dim)
    }

    /// Sample mean and standard error of `-exp(-a W(x))`,
    /// `W(x) = W₀(1 + r_f) + W₀ xᵀ(X - r_f 1)`.
    pub fn expected_utility(&self, market: &MarketSpec, x: &[f64]) -> Result<(f64, f64)> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch("portfolio length must equal the model dimension"));
        }
        let riskless = market.w0() * (1.0 + market.r_f());
        let mut mean = 0.0;
        let mut m2 = 0.0;
        let mut count = 0.0;
        for row in self.rows() {
            let excess: f64 = x.iter().zip(row).map(|(xi, ri)| xi * (ri - market.r_f())).sum();
            let utility = -(-market.a() * (riskless + market.w0() * excess)).exp();
            count += 1.0;
            let delta = utility - mean;
            mean += delta / count;
            m2 += delta * (utility - mean);
        }
        let stderr = if count > 1.0 { (m2 / (count - 1.0) / count).sqrt() } else { f64::INFINITY };
        Ok((mean, stderr))
    }
}

pub fn sample_nmvm(model: &NmvmModel, n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    Ok(NmvmSample::draw(model, n, seed)?.rows().map(|r| r.to_vec()).collect())
}

/// Monte-Carlo estimate and standard error of `E[-e^{-a W(x)}]`.
pub fn mc_expected_utility(
    model: &NmvmModel,
    market: &MarketSpec,
    x: &[f64],
    n: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if n < 1000 {
        return Err(Error::invalid("n", "must be at least 1000"));
    }
    NmvmSample::draw(model, n, seed)?.expected_utility(market, x)
}
