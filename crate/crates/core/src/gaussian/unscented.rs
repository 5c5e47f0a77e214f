use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::kalman::GaussianBelief;
use super::stabilize_cov;
use crate::error::{Result, SmcError};
use crate::scalar::Real;
use crate::ssm::GaussianModel;
use crate::stochastics::cholesky_with_jitter;

/// Where the noise enters the sigma points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UtForm {
    /// Sigma points over `(x, w, v)`: state, process noise and observation
    /// noise. The propagated points are reused for the observation.
    #[default]
    Augmented,
    /// Sigma points over `x` only; noise covariances are added after each
    /// transform and the predicted belief is redrawn before the update.
    Additive,
}

/// Scaled unscented transform constants. `kappa = None` means `3 - n`, with
/// `n` the dimension the sigma points live in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct UtParams {
    pub alpha: f64,
    pub beta: f64,
    pub kappa: Option<f64>,
    pub form: UtForm,
}

impl Default for UtParams {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 2.0,
            kappa: None,
            form: UtForm::Augmented,
        }
    }
}

impl UtParams {
    pub fn kappa_for(&self, n: usize) -> f64 {
        self.kappa.unwrap_or(3.0 - n as f64)
    }

    /// `alpha^2 (n + kappa) - n`.
    pub fn lambda(&self, n: usize) -> f64 {
        self.alpha * self.alpha * (n as f64 + self.kappa_for(n)) - n as f64
    }
}

/// `2n + 1` sigma points with mean and covariance weights.
#[derive(Debug, Clone)]
pub struct SigmaPoints<T: Real> {
    pub points: Vec<DVector<T>>,
    pub mean_weights: Vec<T>,
    pub cov_weights: Vec<T>,
}

pub fn sigma_points<T: Real>(
    mean: &DVector<T>,
    cov: &DMatrix<T>,
    params: &UtParams,
) -> Result<SigmaPoints<T>> {
    let n = mean.len();
    let lambda = params.lambda(n);
    let scale = n as f64 + lambda;
    if !(scale > 0.0) {
        return Err(SmcError::InvalidParameter(format!(
            "n + lambda = {scale} must be positive"
        )));
    }
    let root = cholesky_with_jitter(&(cov * T::lit(scale)))?;
    let mut points = Vec::with_capacity(2 * n + 1);
    points.push(mean.clone());
    for j in 0..n {
        points.push(mean + root.column(j));
    }
    for j in 0..n {
        points.push(mean - root.column(j));
    }
    let w0 = lambda / scale;
    let wi = T::lit(0.5 / scale);
    let mut mean_weights = vec![wi; 2 * n + 1];
    let mut cov_weights = mean_weights.clone();
    mean_weights[0] = T::lit(w0);
    cov_weights[0] = T::lit(w0 + 1.0 - params.alpha * params.alpha + params.beta);
    Ok(SigmaPoints {
        points,
        mean_weights,
        cov_weights,
    })
}

/// Unscented step to time `k`.
pub fn ukf_step<T: Real, M: GaussianModel<T> + ?Sized>(
    model: &M,
    belief: &GaussianBelief<T>,
    y: &DVector<T>,
    k: usize,
    params: &UtParams,
) -> Result<GaussianBelief<T>> {
    match params.form {
        UtForm::Augmented => augmented_step(model, belief, y, k, params),
        UtForm::Additive => additive_step(model, belief, y, k, params),
    }
}

fn augmented_step<T: Real, M: GaussianModel<T> + ?Sized>(
    model: &M,
    belief: &GaussianBelief<T>,
    y: &DVector<T>,
    k: usize,
    params: &UtParams,
) -> Result<GaussianBelief<T>> {
    let n = belief.dim();
    let d = y.len();
    let na = 2 * n + d;
    let mut mean = DVector::zeros(na);
    mean.rows_mut(0, n).copy_from(&belief.mean);
    let mut cov = DMatrix::zeros(na, na);
    cov.view_mut((0, 0), (n, n)).copy_from(&belief.cov);
    cov.view_mut((n, n), (n, n))
        .copy_from(&model.process_cov(k));
    cov.view_mut((2 * n, 2 * n), (d, d))
        .copy_from(&model.obs_cov(k));
    let sp = sigma_points(&mean, &cov, params)?;

    let mut buf = vec![T::zero(); n];
    let states: Vec<DVector<T>> = sp
        .points
        .iter()
        .map(|p| {
            model.transition_mean(k, &p.as_slice()[..n], &mut buf);
            DVector::from_column_slice(&buf) + p.rows(n, n)
        })
        .collect();
    let obs: Vec<DVector<T>> = states
        .iter()
        .zip(&sp.points)
        .map(|(x, p)| model.obs_mean(k, x.as_slice()) + p.rows(2 * n, d))
        .collect();
    let pred_mean = weighted_sum(&states, &sp.mean_weights);
    let mut pred_cov = DMatrix::zeros(n, n);
    for (x, w) in states.iter().zip(&sp.cov_weights) {
        let dx = x - &pred_mean;
        pred_cov += &dx * dx.transpose() * *w;
    }
    correct(
        model,
        k,
        y,
        &pred_mean,
        &stabilize_cov(&pred_cov),
        &states,
        &obs,
        &sp,
        DMatrix::zeros(d, d),
    )
}

fn additive_step<T: Real, M: GaussianModel<T> + ?Sized>(
    model: &M,
    belief: &GaussianBelief<T>,
    y: &DVector<T>,
    k: usize,
    params: &UtParams,
) -> Result<GaussianBelief<T>> {
    let n = belief.dim();
    let sp = sigma_points(&belief.mean, &belief.cov, params)?;
    let mut buf = vec![T::zero(); n];
    let propagated: Vec<DVector<T>> = sp
        .points
        .iter()
        .map(|p| {
            model.transition_mean(k, p.as_slice(), &mut buf);
            DVector::from_column_slice(&buf)
        })
        .collect();
    let pred_mean = weighted_sum(&propagated, &sp.mean_weights);
    let mut pred_cov = model.process_cov(k);
    for (p, w) in propagated.iter().zip(&sp.cov_weights) {
        let d = p - &pred_mean;
        pred_cov += &d * d.transpose() * *w;
    }
    let pred_cov = stabilize_cov(&pred_cov);

    let sp = sigma_points(&pred_mean, &pred_cov, params)?;
    let obs: Vec<DVector<T>> = sp
        .points
        .iter()
        .map(|p| model.obs_mean(k, p.as_slice()))
        .collect();
    correct(
        model,
        k,
        y,
        &pred_mean,
        &pred_cov,
        &sp.points,
        &obs,
        &sp,
        model.obs_cov(k),
    )
}

/// Kalman correction from sigma points `states` and their observations `obs`.
#[allow(clippy::too_many_arguments)]
fn correct<T: Real, M: GaussianModel<T> + ?Sized>(
    model: &M,
    k: usize,
    y: &DVector<T>,
    pred_mean: &DVector<T>,
    pred_cov: &DMatrix<T>,
    states: &[DVector<T>],
    obs: &[DVector<T>],
    sp: &SigmaPoints<T>,
    mut s: DMatrix<T>,
) -> Result<GaussianBelief<T>> {
    let n = pred_mean.len();
    // average residuals against the centre point so angular maps stay unwrapped
    let anchor = &obs[0];
    let mut yhat = anchor.clone();
    for (o, w) in obs.iter().zip(&sp.mean_weights) {
        yhat += model.obs_residual(o, anchor) * *w;
    }
    let mut cross = DMatrix::zeros(n, y.len());
    for ((x, o), w) in states.iter().zip(obs).zip(&sp.cov_weights) {
        let ry = model.obs_residual(o, &yhat);
        let rx = x - pred_mean;
        s += &ry * ry.transpose() * *w;
        cross += &rx * ry.transpose() * *w;
    }
    let s_chol = nalgebra::Cholesky::new(s.clone()).ok_or(SmcError::Singular)?;
    let gain = s_chol.solve(&cross.transpose()).transpose();
    let mean = pred_mean + &gain * model.obs_residual(y, &yhat);
    let cov = pred_cov - &gain * s * gain.transpose();
    Ok(GaussianBelief {
        k,
        mean,
        cov: stabilize_cov(&cov),
    })
}

fn weighted_sum<T: Real>(points: &[DVector<T>], weights: &[T]) -> DVector<T> {
    let mut acc = DVector::zeros(points[0].len());
    for (p, w) in points.iter().zip(weights) {
        acc += p * *w;
    }
    acc
}

/// Runs the unscented filter from the model's initial moments.
pub fn run_ukf<T: Real, M: GaussianModel<T> + ?Sized>(
    model: &M,
    observations: &[Vec<T>],
    params: &UtParams,
) -> Result<Vec<GaussianBelief<T>>> {
    let mut belief = GaussianBelief::new(0, model.initial_mean(), model.initial_cov())?;
    let mut out = Vec::with_capacity(observations.len());
    for (i, y) in observations.iter().enumerate() {
        belief = ukf_step(
            model,
            &belief,
            &DVector::from_column_slice(y),
            i + 1,
            params,
        )?;
        out.push(belief.clone());
    }
    Ok(out)
}
