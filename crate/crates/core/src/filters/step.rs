use super::{finish_step, FilterKind, FilterOptions, OffspringMode, StepOutput};
use crate::cloud::{draw_ancestors, normalize_at, ParticleCloud};
use crate::error::{Result, SmcError, WeightStage};
use crate::scalar::Real;
use crate::ssm::{RegimeSet, StateSpaceModel};
use crate::stochastics::{uniform_index, RngStream};

/// Bootstrap step: propagate through the dynamics, weight by the likelihood of
/// `y`, normalize, resample.
pub fn bpf_step<T: Real, M: StateSpaceModel<T> + ?Sized>(
    model: &M,
    cloud: &ParticleCloud<T>,
    y: &[T],
    opts: &FilterOptions,
    rng: &mut RngStream,
) -> Result<StepOutput<T>> {
    particle_step(model, cloud, y, None, FilterKind::Bpf, None, opts, rng)
}

/// Auxiliary step: pre-select ancestors by the likelihood of their transition
/// mean, propagate, correct with the ratio weight.
pub fn apf_step<T: Real, M: StateSpaceModel<T> + ?Sized>(
    model: &M,
    cloud: &ParticleCloud<T>,
    y: &[T],
    opts: &FilterOptions,
    rng: &mut RngStream,
) -> Result<StepOutput<T>> {
    particle_step(model, cloud, y, None, FilterKind::Apf, None, opts, rng)
}

/// Predictive smoother step. Each propagated particle also gets an offspring
/// one step ahead, scored against `y_next`; the particle's weight is the
/// product of both likelihoods. Without `y_next` this is exactly
/// [`bpf_step`].
pub fn pbps_step<T: Real, M: StateSpaceModel<T> + ?Sized>(
    model: &M,
    cloud: &ParticleCloud<T>,
    y: &[T],
    y_next: Option<&[T]>,
    offspring: OffspringMode,
    opts: &FilterOptions,
    rng: &mut RngStream,
) -> Result<StepOutput<T>> {
    particle_step(
        model,
        cloud,
        y,
        y_next,
        FilterKind::Pbps(offspring),
        None,
        opts,
        rng,
    )
}

/// Regime-switching step: every particle draws its own regime uniformly from
/// `regimes` and is propagated under it; the rest is the `base` step.
#[allow(clippy::too_many_arguments)]
pub fn rs_step<T: Real, M: StateSpaceModel<T> + ?Sized>(
    model: &M,
    regimes: &RegimeSet<T>,
    cloud: &ParticleCloud<T>,
    y: &[T],
    y_next: Option<&[T]>,
    base: FilterKind,
    opts: &FilterOptions,
    rng: &mut RngStream,
) -> Result<StepOutput<T>> {
    particle_step(model, cloud, y, y_next, base, Some(regimes), opts, rng)
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn particle_step<T: Real, M: StateSpaceModel<T> + ?Sized>(
    model: &M,
    cloud: &ParticleCloud<T>,
    y: &[T],
    y_next: Option<&[T]>,
    kind: FilterKind,
    regimes: Option<&RegimeSet<T>>,
    opts: &FilterOptions,
    rng: &mut RngStream,
) -> Result<StepOutput<T>> {
    let dim = model.state_dim();
    if cloud.dim() != dim {
        return Err(SmcError::Dimension(format!(
            "cloud dimension {} for a model of dimension {dim}",
            cloud.dim()
        )));
    }
    let n = cloud.len();
    let k = cloud.k() + 1;

    // ln w_{k-1}; skipped for the usual equal-weight input
    let prior: Option<Vec<T>> = if cloud.is_uniform() {
        None
    } else {
        Some(cloud.weights().iter().map(|w| w.ln()).collect())
    };
    let prior_at = |i: usize| prior.as_ref().map_or(T::zero(), |p| p[i]);

    let labels: Option<Vec<usize>> = match regimes {
        Some(m) => Some(
            (0..n)
                .map(|_| uniform_index(m.len(), rng))
                .collect::<Result<_>>()?,
        ),
        None => None,
    };
    let regime_of = |i: usize| -> Option<T> {
        match (regimes, &labels) {
            (Some(m), Some(l)) => Some(m.get(l[i])),
            _ => None,
        }
    };

    let mut propagated = vec![T::zero(); n * dim];
    let mut log_w = vec![T::zero(); n];
    let mut out_labels = labels.clone();

    match kind {
        FilterKind::Bpf | FilterKind::Pbps(_) => {
            for (i, (out, lw)) in propagated
                .chunks_exact_mut(dim)
                .zip(log_w.iter_mut())
                .enumerate()
            {
                model.sample_transition(k, cloud.particle(i), regime_of(i), rng, out);
                *lw = prior_at(i) + model.log_likelihood(k, out, y);
            }
            if let (FilterKind::Pbps(mode), Some(y_next)) = (kind, y_next) {
                let mut offspring = vec![T::zero(); dim];
                for (i, (x, lw)) in propagated
                    .chunks_exact(dim)
                    .zip(log_w.iter_mut())
                    .enumerate()
                {
                    match mode {
                        OffspringMode::Deterministic => {
                            model.transition_mean(k + 1, x, &mut offspring)
                        }
                        OffspringMode::Stochastic => {
                            model.sample_transition(k + 1, x, regime_of(i), rng, &mut offspring)
                        }
                    }
                    *lw += model.log_likelihood(k + 1, &offspring, y_next);
                }
            }
        }
        FilterKind::Apf => {
            let mut pilot_ll = vec![T::zero(); n];
            let mut first_stage = vec![T::zero(); n];
            let mut pilot = vec![T::zero(); dim];
            for i in 0..n {
                model.transition_mean(k, cloud.particle(i), &mut pilot);
                pilot_ll[i] = model.log_likelihood(k, &pilot, y);
                first_stage[i] = prior_at(i) + pilot_ll[i];
            }
            let first_w = normalize_at(&first_stage, k, WeightStage::Pilot)?;
            let ancestors = draw_ancestors(&first_w, n, rng, opts.scheme).map_err(|e| match e {
                SmcError::ZeroWeights => SmcError::Degeneracy {
                    k,
                    stage: WeightStage::Pilot,
                },
                other => other,
            })?;
            for (i, (out, lw)) in propagated
                .chunks_exact_mut(dim)
                .zip(log_w.iter_mut())
                .enumerate()
            {
                let a = ancestors[i];
                model.sample_transition(k, cloud.particle(a), regime_of(a), rng, out);
                *lw = model.log_likelihood(k, out, y) - pilot_ll[a];
            }
            if let Some(l) = &labels {
                out_labels = Some(ancestors.iter().map(|&a| l[a]).collect());
            }
        }
    }

    let weights = normalize_at(&log_w, k, WeightStage::Correction)?;
    let weighted = ParticleCloud::from_parts(k, dim, propagated, weights, out_labels);
    finish_step(weighted, opts, rng)
}
