//! Rayon front ends for the core samplers and sweeps.
//!
//! Draw `k` of a run always comes from stream `k` of the run's key, so
//! splitting the index range into chunks changes nothing in the output.

use std::ops::Range;

use ggc_core::mixing::MixingLaw;
use ggc_core::portfolio::{MarketSpec, NmvmModel};
use ggc_core::robustness::{RobustnessReport, SweepContext, SweepOptions};
use ggc_core::sampling::{sample_indices, MixingSampler, NmvmSample, SampleBatch, StreamKey};
use ggc_core::{Error, Result};
use rayon::prelude::*;

const CHUNK: u64 = 1 << 14;

fn chunks(n: usize) -> Vec<Range<u64>> {
    let n = n as u64;
    (0..n.div_ceil(CHUNK)).map(|c| c * CHUNK..((c + 1) * CHUNK).min(n)).collect()
}

/// Same values as [`ggc_core::sampling::sample_mixing`].
pub fn sample_mixing(law: &MixingLaw, n: usize, seed: u64) -> Result<SampleBatch> {
    if n == 0 {
        return Err(Error::InvalidParameter { field: "n".into(), reason: "must be at least 1" });
    }
    let sampler = MixingSampler::new(law)?;
    let key = StreamKey::new(seed);
    let parts: Vec<(Vec<f64>, u64)> = chunks(n).into_par_iter().map(|r| sample_indices(&sampler, &key, r)).collect();
    let proposals: u64 = parts.iter().map(|p| p.1).sum();
    let values = parts.into_iter().flat_map(|p| p.0).collect();
    let acceptance_rate = sampler.acceptance_rate().map(|_| n as f64 / proposals as f64);
    Ok(SampleBatch { values, seed, law: law.clone(), acceptance_rate })
}

/// Same draws as [`NmvmSample::draw`].
pub fn sample_returns(model: &NmvmModel, n: usize, seed: u64) -> Result<NmvmSample> {
    let key = StreamKey::new(seed);
    let parts = chunks(n).into_par_iter().map(|r| NmvmSample::draw_indices(model, &key, r)).collect::<Result<Vec<_>>>()?;
    NmvmSample::concat(parts)
}

/// Same report as [`ggc_core::robustness::run_sweep`], steps evaluated concurrently.
pub fn run_sweep(
    true_model: &NmvmModel,
    market: &MarketSpec,
    schedule: &[NmvmModel],
    options: &SweepOptions,
) -> Result<RobustnessReport> {
    let context = SweepContext::new(true_model, market, options)?;
    let steps = schedule.par_iter().enumerate().map(|(i, model)| context.step(i + 1, model)).collect();
    Ok(context.into_report(steps))
}
