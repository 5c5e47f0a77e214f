//! Weighted particle clouds, log-domain weight normalization and resampling.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Result, SmcError, WeightStage};
use crate::scalar::Real;
use crate::stochastics::{multinomial_ancestors, systematic_ancestors, RngStream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResamplingScheme {
    #[default]
    Multinomial,
    Systematic,
}

/// `N` particles in `R^dim` with normalized weights at time `k`.
///
/// Particles are stored row-major in one flat buffer. Optional regime labels
/// are indices into a [`RegimeSet`](crate::ssm::RegimeSet).
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleCloud<T> {
    k: usize,
    dim: usize,
    particles: Vec<T>,
    weights: Vec<T>,
    regimes: Option<Vec<usize>>,
}

impl<T: Real> ParticleCloud<T> {
    /// Cloud with equal weights `1/N`.
    pub fn uniform(k: usize, dim: usize, particles: Vec<T>) -> Result<Self> {
        if dim == 0 || particles.is_empty() || !particles.len().is_multiple_of(dim) {
            return Err(SmcError::Dimension(format!(
                "{} coordinates do not form particles of dimension {dim}",
                particles.len()
            )));
        }
        let n = particles.len() / dim;
        Ok(Self {
            k,
            dim,
            particles,
            weights: vec![T::one() / T::of_usize(n); n],
            regimes: None,
        })
    }

    /// Cloud with explicit weights, which must already be normalized.
    pub fn weighted(k: usize, dim: usize, particles: Vec<T>, weights: Vec<T>) -> Result<Self> {
        let mut cloud = Self::uniform(k, dim, particles)?;
        if weights.len() != cloud.len() {
            return Err(SmcError::Dimension(format!(
                "{} weights for {} particles",
                weights.len(),
                cloud.len()
            )));
        }
        let total: f64 = weights.iter().map(|w| w.to_f64_lossy()).sum();
        let tol = 1e-9f64.max(T::default_epsilon().to_f64_lossy() * weights.len() as f64);
        if weights.iter().any(|w| !(*w >= T::zero())) || (total - 1.0).abs() > tol {
            return Err(SmcError::InvalidParameter(format!(
                "weights are not normalized (sum {total})"
            )));
        }
        cloud.weights = weights;
        Ok(cloud)
    }

    /// Assembles a cloud from already validated parts.
    pub(crate) fn from_parts(
        k: usize,
        dim: usize,
        particles: Vec<T>,
        weights: Vec<T>,
        regimes: Option<Vec<usize>>,
    ) -> Self {
        debug_assert_eq!(particles.len(), weights.len() * dim);
        debug_assert!(regimes.as_ref().is_none_or(|r| r.len() == weights.len()));
        Self {
            k,
            dim,
            particles,
            weights,
            regimes,
        }
    }

    pub fn with_regimes(mut self, regimes: Vec<usize>) -> Result<Self> {
        if regimes.len() != self.len() {
            return Err(SmcError::Dimension(format!(
                "{} regime labels for {} particles",
                regimes.len(),
                self.len()
            )));
        }
        self.regimes = Some(regimes);
        Ok(self)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn particle(&self, i: usize) -> &[T] {
        &self.particles[i * self.dim..(i + 1) * self.dim]
    }

    pub fn particles(&self) -> &[T] {
        &self.particles
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, T> {
        self.particles.chunks_exact(self.dim)
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn regimes(&self) -> Option<&[usize]> {
        self.regimes.as_deref()
    }

    pub fn is_uniform(&self) -> bool {
        let w0 = self.weights[0];
        self.weights.iter().all(|w| *w == w0)
    }

    /// Particle-wise weighted average `sum_i w_i x_i`.
    pub fn posterior_mean(&self) -> Vec<T> {
        posterior_mean(self)
    }

    pub fn effective_sample_size(&self) -> T {
        effective_sample_size(self)
    }
}

/// Normalizes raw log-weights: subtract the max, exponentiate, divide by the sum.
///
/// Fails with [`SmcError::Degeneracy`] at time `k` when every entry is `-inf`.
pub fn normalize_log_weights<T: Real>(raw: &[T], k: usize) -> Result<Vec<T>> {
    normalize_at(raw, k, WeightStage::Correction)
}

pub(crate) fn normalize_at<T: Real>(raw: &[T], k: usize, stage: WeightStage) -> Result<Vec<T>> {
    if raw.is_empty() {
        return Err(SmcError::EmptySet);
    }
    let mut max = T::neg_infinity();
    for (i, lw) in raw.iter().enumerate() {
        if !(lw.is_finite() || *lw == T::neg_infinity()) {
            return Err(SmcError::InvalidParameter(format!(
                "log-weight {i} is {lw} at k={k}"
            )));
        }
        if *lw > max {
            max = *lw;
        }
    }
    if max == T::neg_infinity() {
        return Err(SmcError::Degeneracy { k, stage });
    }
    let mut out: Vec<T> = raw.iter().map(|lw| (*lw - max).exp()).collect();
    let total = out.iter().fold(T::zero(), |acc, w| acc + *w);
    for w in &mut out {
        *w /= total;
    }
    Ok(out)
}

/// Resamples `cloud` by its weights; regime labels travel with their particles.
/// The result carries equal weights `1/N`.
pub fn resample<T: Real>(
    cloud: &ParticleCloud<T>,
    rng: &mut RngStream,
    scheme: ResamplingScheme,
) -> Result<ParticleCloud<T>> {
    let n = cloud.len();
    let ancestors = draw_ancestors(cloud.weights(), n, rng, scheme).map_err(|e| match e {
        SmcError::ZeroWeights => SmcError::Degeneracy {
            k: cloud.k,
            stage: WeightStage::Correction,
        },
        other => other,
    })?;
    Ok(gather(cloud, &ancestors))
}

pub(crate) fn draw_ancestors<T: Real>(
    weights: &[T],
    n: usize,
    rng: &mut RngStream,
    scheme: ResamplingScheme,
) -> Result<Vec<usize>> {
    match scheme {
        ResamplingScheme::Multinomial => multinomial_ancestors(weights, n, rng),
        ResamplingScheme::Systematic => systematic_ancestors(weights, n, rng),
    }
}

/// Uniformly weighted cloud made of the given ancestors.
pub(crate) fn gather<T: Real>(cloud: &ParticleCloud<T>, ancestors: &[usize]) -> ParticleCloud<T> {
    let dim = cloud.dim;
    let mut particles = Vec::with_capacity(ancestors.len() * dim);
    for &a in ancestors {
        particles.extend_from_slice(cloud.particle(a));
    }
    let n = ancestors.len();
    ParticleCloud {
        k: cloud.k,
        dim,
        particles,
        weights: vec![T::one() / T::of_usize(n); n],
        regimes: cloud
            .regimes
            .as_ref()
            .map(|labels| ancestors.iter().map(|&a| labels[a]).collect()),
    }
}

/// Weighted average `sum_i w_i x_i`.
pub fn posterior_mean<T: Real>(cloud: &ParticleCloud<T>) -> Vec<T> {
    let mut mean = vec![T::zero(); cloud.dim];
    for (x, w) in cloud.iter().zip(&cloud.weights) {
        for (m, xi) in mean.iter_mut().zip(x) {
            *m += *w * *xi;
        }
    }
    mean
}

/// `1 / sum_i w_i^2`.
pub fn effective_sample_size<T: Real>(cloud: &ParticleCloud<T>) -> T {
    let s = cloud.weights.iter().fold(T::zero(), |acc, w| acc + *w * *w);
    T::one() / s
}

/// Writes clouds as CSV with header `k,i,weight,x0,...,x{n-1}[,regime]`.
///
/// All clouds must share the state dimension and either all or none carry
/// regime labels. Values are written in shortest round-trip form.
pub fn write_clouds_csv<T: Real, W: Write>(clouds: &[ParticleCloud<T>], out: W) -> Result<()> {
    let dim = clouds.first().map_or(0, |c| c.dim);
    let labeled = clouds.first().is_some_and(|c| c.regimes.is_some());
    if clouds
        .iter()
        .any(|c| c.dim != dim || c.regimes.is_some() != labeled)
    {
        return Err(SmcError::Dimension(
            "clouds differ in dimension or labeling".into(),
        ));
    }
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["k".to_string(), "i".to_string(), "weight".to_string()];
    header.extend((0..dim).map(|j| format!("x{j}")));
    if labeled {
        header.push("regime".into());
    }
    let csv_err = |e: csv::Error| SmcError::Parse {
        path: "<cloud csv>".into(),
        message: e.to_string(),
    };
    w.write_record(&header).map_err(csv_err)?;
    for cloud in clouds {
        for i in 0..cloud.len() {
            let mut row = vec![
                cloud.k.to_string(),
                i.to_string(),
                cloud.weights[i].to_string(),
            ];
            row.extend(cloud.particle(i).iter().map(|x| x.to_string()));
            if let Some(labels) = &cloud.regimes {
                row.push(labels[i].to_string());
            }
            w.write_record(&row).map_err(csv_err)?;
        }
    }
    w.flush().map_err(|e| SmcError::io("<cloud csv>", e))
}

/// Parses the format written by [`write_clouds_csv`]. Rows are grouped into
/// clouds by consecutive equal `k`.
pub fn read_clouds_csv<T: Real, R: Read>(input: R) -> Result<Vec<ParticleCloud<T>>> {
    let perr = |message: String| SmcError::Parse {
        path: "<cloud csv>".into(),
        message,
    };
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers().map_err(|e| perr(e.to_string()))?.clone();
    let cols: Vec<&str> = header.iter().collect();
    if cols.len() < 4 || cols[..3] != ["k", "i", "weight"] {
        return Err(perr(format!("unexpected header {cols:?}")));
    }
    let labeled = cols.last() == Some(&"regime");
    let dim = cols.len() - 3 - usize::from(labeled);
    for (j, c) in cols[3..3 + dim].iter().enumerate() {
        if *c != format!("x{j}") {
            return Err(perr(format!("unexpected column {c}")));
        }
    }
    let parse_t = |s: &str| {
        s.parse::<T>()
            .map_err(|_| perr(format!("bad number {s:?}")))
    };

    let mut clouds = Vec::new();
    let mut current: Option<(usize, Vec<T>, Vec<T>, Vec<usize>)> = None;
    let finish = |(k, particles, weights, labels): (usize, Vec<T>, Vec<T>, Vec<usize>)| -> Result<ParticleCloud<T>> {
        let cloud = ParticleCloud { k, dim, particles, weights, regimes: None };
        if labeled {
            cloud.with_regimes(labels)
        } else {
            Ok(cloud)
        }
    };
    for record in rdr.records() {
        let record = record.map_err(|e| perr(e.to_string()))?;
        let k: usize = record[0]
            .parse()
            .map_err(|_| perr(format!("bad k {:?}", &record[0])))?;
        if current.as_ref().is_some_and(|c| c.0 != k) {
            clouds.push(finish(current.take().unwrap())?);
        }
        let entry = current.get_or_insert_with(|| (k, Vec::new(), Vec::new(), Vec::new()));
        entry.2.push(parse_t(&record[2])?);
        for j in 0..dim {
            entry.1.push(parse_t(&record[3 + j])?);
        }
        if labeled {
            entry.3.push(
                record[3 + dim]
                    .parse()
                    .map_err(|_| perr("bad regime label".into()))?,
            );
        }
    }
    if let Some(c) = current {
        clouds.push(finish(c)?);
    }
    Ok(clouds)
}
