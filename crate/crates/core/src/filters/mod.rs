//! Particle filters: bootstrap, auxiliary, the one-step predictive smoother,
//! their regime-switching variants, and the model-averaging bootstrap filter.

mod dma;
mod run;
mod step;

use serde::{Deserialize, Serialize};

use crate::cloud::{ParticleCloud, ResamplingScheme};
use crate::scalar::Real;

pub use dma::{dma_bpf_step, initialize_labels};
pub use run::{run_filter, run_particle_filter, FilterOutput, ParticleAlgorithm};
pub use step::{apf_step, bpf_step, pbps_step, rs_step};

/// How the smoother generates the one-step-ahead offspring of a particle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OffspringMode {
    /// Offspring is the transition mean; consumes no randomness.
    #[default]
    Deterministic,
    /// Offspring is a draw from the transition kernel.
    Stochastic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterKind {
    Bpf,
    Apf,
    Pbps(OffspringMode),
}

impl FilterKind {
    pub fn name(&self) -> &'static str {
        match self {
            FilterKind::Bpf => "BPF",
            FilterKind::Apf => "APF",
            FilterKind::Pbps(_) => "PBPS",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterOptions {
    pub scheme: ResamplingScheme,
    /// Resample only when `ESS < threshold * N`. `None` resamples every step.
    pub ess_threshold: Option<f64>,
    /// Keep the weighted (pre-resampling) cloud of every step in the output.
    pub keep_clouds: bool,
}

impl Default for FilterOptions {
    fn default() -> Self {
        Self {
            scheme: ResamplingScheme::Multinomial,
            ess_threshold: None,
            keep_clouds: false,
        }
    }
}

/// Result of one filter step.
#[derive(Debug, Clone)]
pub struct StepOutput<T> {
    /// Cloud handed to the next step (resampled unless the ESS rule skipped it).
    pub cloud: ParticleCloud<T>,
    /// Weighted cloud after the correction, before resampling.
    pub weighted: ParticleCloud<T>,
    /// Posterior mean of `weighted`.
    pub estimate: Vec<T>,
    pub ess: T,
    /// Normalized per-regime weights (model-averaging step only).
    pub model_weights: Option<Vec<T>>,
}

/// Resamples unless the ESS policy says otherwise.
pub(crate) fn finish_step<T: Real>(
    weighted: ParticleCloud<T>,
    opts: &FilterOptions,
    rng: &mut crate::stochastics::RngStream,
) -> crate::error::Result<StepOutput<T>> {
    let estimate = weighted.posterior_mean();
    let ess = weighted.effective_sample_size();
    let n = T::of_usize(weighted.len());
    let skip = opts.ess_threshold.is_some_and(|t| ess >= T::lit(t) * n);
    let cloud = if skip {
        weighted.clone()
    } else {
        crate::cloud::resample(&weighted, rng, opts.scheme)?
    };
    Ok(StepOutput {
        cloud,
        weighted,
        estimate,
        ess,
        model_weights: None,
    })
}
