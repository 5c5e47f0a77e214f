use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::RngStream;
use crate::error::{Result, SmcError};
use crate::scalar::Real;

/// ln(sqrt(2 pi)).
pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Lower Cholesky factor of a symmetric PSD matrix.
///
/// A failed factorization is retried once with `1e-12 * trace / n` added to
/// the diagonal. The all-zero matrix factors to zero.
pub fn cholesky_with_jitter<T: Real>(cov: &DMatrix<T>) -> Result<DMatrix<T>> {
    let n = cov.nrows();
    if n != cov.ncols() {
        return Err(SmcError::Dimension(format!(
            "covariance is {}x{}",
            n,
            cov.ncols()
        )));
    }
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    if cov.iter().all(|v| *v == T::zero()) {
        return Ok(DMatrix::zeros(n, n));
    }
    if let Some(ch) = Cholesky::new(cov.clone()) {
        return Ok(ch.l());
    }
    let jitter = T::lit(1e-12) * cov.trace() / T::of_usize(n);
    if jitter <= T::zero() {
        return Err(SmcError::NotPositiveDefinite);
    }
    let mut bumped = cov.clone();
    for i in 0..n {
        bumped[(i, i)] += jitter;
    }
    Cholesky::new(bumped)
        .map(|ch| ch.l())
        .ok_or(SmcError::NotPositiveDefinite)
}

/// Draws from `N(mean, cov)` with a factor computed once.
#[derive(Debug, Clone)]
pub struct GaussianSampler<T: Real> {
    mean: DVector<T>,
    factor: DMatrix<T>,
}

impl<T: Real> GaussianSampler<T> {
    pub fn new(mean: DVector<T>, cov: &DMatrix<T>) -> Result<Self> {
        if mean.len() != cov.nrows() {
            return Err(SmcError::Dimension(format!(
                "mean has {} entries, covariance is {}x{}",
                mean.len(),
                cov.nrows(),
                cov.ncols()
            )));
        }
        let factor = cholesky_with_jitter(cov)?;
        Ok(Self { mean, factor })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Writes one draw into `out`.
    pub fn sample_into(&self, rng: &mut RngStream, out: &mut [T]) {
        let n = self.mean.len();
        let z: Vec<T> = (0..n).map(|_| T::lit(rng.standard_normal())).collect();
        for (i, o) in out.iter_mut().enumerate().take(n) {
            let mut acc = self.mean[i];
            for (j, zj) in z.iter().enumerate().take(i + 1) {
                acc += self.factor[(i, j)] * *zj;
            }
            *o = acc;
        }
    }

    pub fn sample(&self, rng: &mut RngStream) -> DVector<T> {
        let mut out = DVector::zeros(self.dim());
        self.sample_into(rng, out.as_mut_slice());
        out
    }
}

/// One draw from `N(mean, cov)`.
pub fn gaussian_sample<T: Real>(
    mean: &DVector<T>,
    cov: &DMatrix<T>,
    rng: &mut RngStream,
) -> Result<DVector<T>> {
    Ok(GaussianSampler::new(mean.clone(), cov)?.sample(rng))
}

/// Exact log-density of `N(mean, cov)` at `x`, normalization included.
pub fn gaussian_logpdf<T: Real>(x: &DVector<T>, mean: &DVector<T>, cov: &DMatrix<T>) -> Result<T> {
    let n = x.len();
    if mean.len() != n || cov.nrows() != n || cov.ncols() != n {
        return Err(SmcError::Dimension(format!(
            "x has {} entries, mean {}, covariance {}x{}",
            n,
            mean.len(),
            cov.nrows(),
            cov.ncols()
        )));
    }
    let ch: Cholesky<T, Dyn> = Cholesky::new(cov.clone()).ok_or(SmcError::Singular)?;
    let diff = x - mean;
    let l = ch.l();
    let z = l.solve_lower_triangular(&diff).ok_or(SmcError::Singular)?;
    let mut log_det_half = T::zero();
    for i in 0..n {
        let d = l[(i, i)];
        if d <= T::zero() {
            return Err(SmcError::Singular);
        }
        log_det_half += d.ln();
    }
    Ok(-T::lit(0.5) * z.norm_squared() - log_det_half - T::of_usize(n) * T::lit(LN_SQRT_2PI))
}

/// Log-density of the scalar normal `N(mean, std^2)`.
#[inline]
pub fn normal_logpdf<T: Real>(x: T, mean: T, std: T) -> T {
    let z = (x - mean) / std;
    -T::lit(0.5) * z * z - std.ln() - T::lit(LN_SQRT_2PI)
}
