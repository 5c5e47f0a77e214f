use super::{FilterOptions, StepOutput};
use crate::cloud::{draw_ancestors, normalize_at, ParticleCloud};
use crate::error::{Result, SmcError, WeightStage};
use crate::scalar::Real;
use crate::ssm::{RegimeSet, StateSpaceModel};
use crate::stochastics::{multinomial_ancestors, uniform_index, RngStream};

/// Initial regime labels drawn i.i.d. uniformly from `regimes`.
pub fn initialize_labels<T: Real>(
    n: usize,
    regimes: &RegimeSet<T>,
    rng: &mut RngStream,
) -> Result<Vec<usize>> {
    (0..n).map(|_| uniform_index(regimes.len(), rng)).collect()
}

fn log_sum_exp<T: Real>(values: impl Iterator<Item = T> + Clone) -> T {
    let max = values
        .clone()
        .fold(T::neg_infinity(), |m, v| if v > m { v } else { m });
    if max == T::neg_infinity() {
        return max;
    }
    max + values.fold(T::zero(), |acc, v| acc + (v - max).exp()).ln()
}

/// Model-averaging bootstrap step.
///
/// 1. Propagate every particle once under its current label (candidates).
/// 2. Each model's weight is the summed candidate likelihood of its members.
/// 3. The `N` slots are split across models by a multinomial draw on those
///    weights.
/// 4. Within each model, ancestors from time `k-1` are resampled in
///    proportion to their own candidate likelihood, relabeled with that model
///    and propagated again. Candidates are discarded.
///
/// The output carries equal weights and the new labels. Slots allocated to a
/// model that has no usable member are redistributed over the other models.
pub fn dma_bpf_step<T: Real, M: StateSpaceModel<T> + ?Sized>(
    model: &M,
    regimes: &RegimeSet<T>,
    cloud: &ParticleCloud<T>,
    y: &[T],
    opts: &FilterOptions,
    rng: &mut RngStream,
) -> Result<StepOutput<T>> {
    let dim = model.state_dim();
    let labels = cloud.regimes().ok_or_else(|| {
        SmcError::InvalidParameter("model averaging needs a labeled cloud".into())
    })?;
    if let Some(bad) = labels.iter().find(|&&l| l >= regimes.len()) {
        return Err(SmcError::InvalidParameter(format!(
            "regime label {bad} outside the set"
        )));
    }
    let n = cloud.len();
    let k = cloud.k() + 1;
    let n_models = regimes.len();
    let uniform = cloud.is_uniform();

    let mut candidate = vec![T::zero(); dim];
    let mut log_lik = Vec::with_capacity(n);
    for (i, &label) in labels.iter().enumerate() {
        model.sample_transition(
            k,
            cloud.particle(i),
            Some(regimes.get(label)),
            rng,
            &mut candidate,
        );
        let prior = if uniform {
            T::zero()
        } else {
            cloud.weights()[i].ln()
        };
        log_lik.push(prior + model.log_likelihood(k, &candidate, y));
    }

    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n_models];
    for (i, &label) in labels.iter().enumerate() {
        members[label].push(i);
    }
    let group_log_w: Vec<T> = members
        .iter()
        .map(|idx| log_sum_exp(idx.iter().map(|&i| log_lik[i])))
        .collect();
    let model_w = normalize_at(&group_log_w, k, WeightStage::ModelAveraging)?;

    let mut counts = vec![0usize; n_models];
    for l in multinomial_ancestors(&model_w, n, rng)? {
        counts[l] += 1;
    }

    // a model with slots but no usable member hands them back
    let usable = |l: usize| !members[l].is_empty() && group_log_w[l] > T::neg_infinity();
    let orphaned: usize = (0..n_models)
        .filter(|&l| !usable(l))
        .map(|l| std::mem::take(&mut counts[l]))
        .sum();
    if orphaned > 0 {
        let fallback: Vec<T> = (0..n_models)
            .map(|l| if usable(l) { model_w[l] } else { T::zero() })
            .collect();
        let redistributed =
            multinomial_ancestors(&fallback, orphaned, rng).map_err(|_| SmcError::Degeneracy {
                k,
                stage: WeightStage::ModelAveraging,
            })?;
        for l in redistributed {
            counts[l] += 1;
        }
    }

    let mut particles = Vec::with_capacity(n * dim);
    let mut new_labels = Vec::with_capacity(n);
    let mut out = vec![T::zero(); dim];
    for (l, idx) in members.iter().enumerate() {
        if counts[l] == 0 {
            continue;
        }
        let within: Vec<T> = idx
            .iter()
            .map(|&i| (log_lik[i] - group_log_w[l]).exp())
            .collect();
        let picks = draw_ancestors(&within, counts[l], rng, opts.scheme)?;
        let regime = Some(regimes.get(l));
        for p in picks {
            model.sample_transition(k, cloud.particle(idx[p]), regime, rng, &mut out);
            particles.extend_from_slice(&out);
            new_labels.push(l);
        }
    }

    let weights = vec![T::one() / T::of_usize(n); n];
    let next = ParticleCloud::from_parts(k, dim, particles, weights, Some(new_labels));
    let estimate = next.posterior_mean();
    Ok(StepOutput {
        cloud: next.clone(),
        weighted: next,
        estimate,
        ess: T::of_usize(n),
        model_weights: Some(model_w),
    })
}
