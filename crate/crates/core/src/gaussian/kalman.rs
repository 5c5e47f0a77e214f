use nalgebra::{Cholesky, DMatrix, DVector};

use super::stabilize_cov;
use crate::error::{Result, SmcError};
use crate::scalar::Real;
use crate::ssm::LinearizedModel;

/// Mean and covariance of a Gaussian approximation of the law of `X_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianBelief<T: Real> {
    pub k: usize,
    pub mean: DVector<T>,
    pub cov: DMatrix<T>,
}

impl<T: Real> GaussianBelief<T> {
    pub fn new(k: usize, mean: DVector<T>, cov: DMatrix<T>) -> Result<Self> {
        if cov.nrows() != mean.len() || cov.ncols() != mean.len() {
            return Err(SmcError::Dimension(format!(
                "mean has {} entries, covariance is {}x{}",
                mean.len(),
                cov.nrows(),
                cov.ncols()
            )));
        }
        Ok(Self { k, mean, cov })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

/// Conditions a predicted belief on `residual = y - yhat` through the
/// observation matrix `h` and noise covariance `r`. Joseph form.
pub(crate) fn linear_update<T: Real>(
    k: usize,
    pred_mean: DVector<T>,
    pred_cov: DMatrix<T>,
    residual: &DVector<T>,
    h: &DMatrix<T>,
    r: &DMatrix<T>,
) -> Result<GaussianBelief<T>> {
    let s = h * &pred_cov * h.transpose() + r;
    let s_chol = Cholesky::new(s.clone()).ok_or(SmcError::Singular)?;
    // K = P H^T S^{-1}, solved as S K^T = H P
    let gain = s_chol.solve(&(h * &pred_cov)).transpose();
    let mean = pred_mean + &gain * residual;
    let n = mean.len();
    let i_kh = DMatrix::identity(n, n) - &gain * h;
    let cov = &i_kh * pred_cov * i_kh.transpose() + &gain * r * gain.transpose();
    Ok(GaussianBelief {
        k,
        mean,
        cov: stabilize_cov(&cov),
    })
}

/// Exact predict/update for `X_k = F X_{k-1} + noise(Q)`, `Y_k = H X_k + noise(R)`.
/// `q` is the effective process covariance `G Q G^T`.
pub fn kalman_step<T: Real>(
    f: &DMatrix<T>,
    q: &DMatrix<T>,
    h: &DMatrix<T>,
    r: &DMatrix<T>,
    belief: &GaussianBelief<T>,
    y: &DVector<T>,
) -> Result<GaussianBelief<T>> {
    let n = belief.dim();
    if f.shape() != (n, n)
        || q.shape() != (n, n)
        || h.ncols() != n
        || r.shape() != (h.nrows(), h.nrows())
        || y.len() != h.nrows()
    {
        return Err(SmcError::Dimension(
            "inconsistent Kalman system dimensions".into(),
        ));
    }
    let pred_mean = f * &belief.mean;
    let pred_cov = stabilize_cov(&(f * &belief.cov * f.transpose() + q));
    let residual = y - h * &pred_mean;
    linear_update(belief.k + 1, pred_mean, pred_cov, &residual, h, r)
}

/// Extended Kalman step to time `k`: linearize the dynamics at the current
/// mean and the observation map at the predicted mean.
pub fn ekf_step<T: Real, M: LinearizedModel<T> + ?Sized>(
    model: &M,
    belief: &GaussianBelief<T>,
    y: &DVector<T>,
    k: usize,
) -> Result<GaussianBelief<T>> {
    let n = belief.dim();
    let mut pred = vec![T::zero(); n];
    model.transition_mean(k, belief.mean.as_slice(), &mut pred);
    let f = model.transition_jacobian(k, belief.mean.as_slice());
    let pred_cov = stabilize_cov(&(&f * &belief.cov * f.transpose() + model.process_cov(k)));
    let h = model.obs_jacobian(k, &pred);
    let yhat = model.obs_mean(k, &pred);
    let residual = model.obs_residual(y, &yhat);
    linear_update(
        k,
        DVector::from_vec(pred),
        pred_cov,
        &residual,
        &h,
        &model.obs_cov(k),
    )
}

/// Runs the extended filter from the model's initial moments. Returns the
/// beliefs at `k = 1..K`.
pub fn run_ekf<T: Real, M: LinearizedModel<T> + ?Sized>(
    model: &M,
    observations: &[Vec<T>],
) -> Result<Vec<GaussianBelief<T>>> {
    let mut belief = GaussianBelief::new(0, model.initial_mean(), model.initial_cov())?;
    let mut out = Vec::with_capacity(observations.len());
    for (i, y) in observations.iter().enumerate() {
        belief = ekf_step(model, &belief, &DVector::from_column_slice(y), i + 1)?;
        out.push(belief.clone());
    }
    Ok(out)
}
