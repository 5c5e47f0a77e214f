use std::time::{Duration, Instant};

use super::dma::{dma_bpf_step, initialize_labels};
use super::step::particle_step;
use super::{FilterKind, FilterOptions};
use crate::cloud::ParticleCloud;
use crate::error::{Result, SmcError};
use crate::scalar::Real;
use crate::ssm::{RegimeSet, StateSpaceModel};
use crate::stochastics::RngStream;

/// Which particle recursion to run.
#[derive(Debug, Clone, PartialEq)]
pub enum ParticleAlgorithm<T> {
    Standard(FilterKind),
    RegimeSwitching(FilterKind, RegimeSet<T>),
    DmaBpf(RegimeSet<T>),
}

impl<T> ParticleAlgorithm<T> {
    pub fn name(&self) -> &'static str {
        match self {
            ParticleAlgorithm::Standard(k) => k.name(),
            ParticleAlgorithm::RegimeSwitching(FilterKind::Bpf, _) => "RS-BPF",
            ParticleAlgorithm::RegimeSwitching(FilterKind::Apf, _) => "RS-APF",
            ParticleAlgorithm::RegimeSwitching(FilterKind::Pbps(_), _) => "RS-PBPS",
            ParticleAlgorithm::DmaBpf(_) => "DMA-BPF",
        }
    }
}

/// Output of a full filtering run over `y_1..y_K`.
#[derive(Debug)]
pub struct FilterOutput<T> {
    /// Posterior mean after each correction; `K` entries on success, truncated
    /// at the failing step otherwise.
    pub estimates: Vec<Vec<T>>,
    pub ess: Vec<T>,
    /// Weighted cloud of every step when `keep_clouds` was set.
    pub clouds: Option<Vec<ParticleCloud<T>>>,
    /// Per-step fraction of particles in each regime (regime filters only).
    pub regime_frequencies: Option<Vec<Vec<T>>>,
    pub wall_time: Duration,
    pub failure: Option<SmcError>,
}

impl<T> FilterOutput<T> {
    pub fn succeeded(&self) -> bool {
        self.failure.is_none()
    }

    /// Time index at which the weights degenerated, if they did.
    pub fn failed_at(&self) -> Option<usize> {
        match &self.failure {
            Some(SmcError::Degeneracy { k, .. }) => Some(*k),
            _ => None,
        }
    }
}

/// Runs one of the plain filters over `observations` (`y_1..y_K`) with `n`
/// particles initialized from the model prior.
pub fn run_filter<T: Real, M: StateSpaceModel<T> + ?Sized>(
    model: &M,
    observations: &[Vec<T>],
    n: usize,
    kind: FilterKind,
    opts: &FilterOptions,
    rng: &mut RngStream,
) -> Result<FilterOutput<T>> {
    run_particle_filter(
        model,
        observations,
        n,
        &ParticleAlgorithm::Standard(kind),
        opts,
        rng,
    )
}

/// Runs any particle algorithm. Degeneracy does not surface as `Err`: it is
/// recorded in [`FilterOutput::failure`] with the estimates computed so far.
pub fn run_particle_filter<T: Real, M: StateSpaceModel<T> + ?Sized>(
    model: &M,
    observations: &[Vec<T>],
    n: usize,
    algorithm: &ParticleAlgorithm<T>,
    opts: &FilterOptions,
    rng: &mut RngStream,
) -> Result<FilterOutput<T>> {
    if observations.is_empty() {
        return Err(SmcError::InvalidParameter(
            "need at least one observation".into(),
        ));
    }
    if n == 0 {
        return Err(SmcError::InvalidParameter(
            "need at least one particle".into(),
        ));
    }
    if let Some((k, y)) = observations
        .iter()
        .enumerate()
        .find(|(_, y)| y.len() != model.obs_dim())
    {
        return Err(SmcError::Dimension(format!(
            "observation {} has {} entries, expected {}",
            k + 1,
            y.len(),
            model.obs_dim()
        )));
    }

    let horizon = observations.len();
    let dim = model.state_dim();
    let start = Instant::now();

    let mut initial = vec![T::zero(); n * dim];
    for x in initial.chunks_exact_mut(dim) {
        model.sample_initial(rng, x);
    }
    let mut cloud = ParticleCloud::uniform(0, dim, initial)?;
    let regimes = match algorithm {
        ParticleAlgorithm::Standard(_) => None,
        ParticleAlgorithm::RegimeSwitching(_, m) => Some(m),
        ParticleAlgorithm::DmaBpf(m) => {
            cloud = cloud.with_regimes(initialize_labels(n, m, rng)?)?;
            Some(m)
        }
    };

    let mut output = FilterOutput {
        estimates: Vec::with_capacity(horizon),
        ess: Vec::with_capacity(horizon),
        clouds: opts.keep_clouds.then(Vec::new),
        regime_frequencies: regimes.map(|_| Vec::with_capacity(horizon)),
        wall_time: Duration::ZERO,
        failure: None,
    };

    for k in 1..=horizon {
        let y = &observations[k - 1];
        let y_next = observations.get(k).map(Vec::as_slice);
        let step = match algorithm {
            ParticleAlgorithm::Standard(kind) => {
                particle_step(model, &cloud, y, y_next, *kind, None, opts, rng)
            }
            ParticleAlgorithm::RegimeSwitching(kind, m) => {
                particle_step(model, &cloud, y, y_next, *kind, Some(m), opts, rng)
            }
            ParticleAlgorithm::DmaBpf(m) => dma_bpf_step(model, m, &cloud, y, opts, rng),
        };
        let step = match step {
            Ok(s) => s,
            Err(e) if e.is_degeneracy() => {
                output.failure = Some(e);
                break;
            }
            Err(e) => return Err(e),
        };
        output.estimates.push(step.estimate);
        output.ess.push(step.ess);
        if let (Some(freqs), Some(m), Some(labels)) = (
            &mut output.regime_frequencies,
            regimes,
            step.weighted.regimes(),
        ) {
            let mut f = vec![T::zero(); m.len()];
            for (l, w) in labels.iter().zip(step.weighted.weights()) {
                f[*l] += *w;
            }
            freqs.push(f);
        }
        if let Some(clouds) = &mut output.clouds {
            clouds.push(step.weighted);
        }
        cloud = step.cloud;
    }
    output.wall_time = start.elapsed();
    Ok(output)
}
