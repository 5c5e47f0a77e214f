use nalgebra::{DMatrix, DVector};

use crate::scalar::Real;
use crate::ssm::{GaussianModel, LinearizedModel, StateSpaceModel, Trajectory};
use crate::stochastics::{normal_logpdf, RngStream};

/// Scalar nonlinear growth model
///
/// ```text
/// X_k = X_{k-1}/2 + 25 X_{k-1}/(1 + X_{k-1}^2) + 8 cos(1.2 (k-1)) + W_{k-1}
/// Y_k = X_k^2 / 20 + V_k
/// ```
///
/// The state is observed only through its square, so its sign is ambiguous.
/// A regime value, when given, replaces `process_std`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Model1<T> {
    pub horizon: usize,
    pub process_std: T,
    pub obs_std: T,
    pub init_std: T,
}

impl<T: Real> Default for Model1<T> {
    fn default() -> Self {
        Self {
            horizon: 50,
            process_std: T::lit(3.0),
            obs_std: T::one(),
            init_std: T::one(),
        }
    }
}

/// `x/2 + 25x/(1+x^2) + 8 cos(1.2 (k-1))`, the mean of `X_k` given `X_{k-1} = x`.
#[inline]
pub fn model1_mean<T: Real>(x: T, k: usize) -> T {
    x * T::lit(0.5)
        + T::lit(25.0) * x / (T::one() + x * x)
        + T::lit(8.0) * T::lit(1.2 * (k as f64 - 1.0)).cos()
}

/// Derivative of [`model1_mean`] in `x`.
#[inline]
pub fn model1_mean_derivative<T: Real>(x: T) -> T {
    let d = T::one() + x * x;
    T::lit(0.5) + T::lit(25.0) * (T::one() - x * x) / (d * d)
}

/// `x^2 / 20`.
#[inline]
pub fn model1_obs_mean<T: Real>(x: T) -> T {
    x * x / T::lit(20.0)
}

impl<T: Real> StateSpaceModel<T> for Model1<T> {
    fn state_dim(&self) -> usize {
        1
    }

    fn obs_dim(&self) -> usize {
        1
    }

    fn sample_initial(&self, rng: &mut RngStream, out: &mut [T]) {
        out[0] = self.init_std * T::lit(rng.standard_normal());
    }

    fn sample_transition(
        &self,
        k: usize,
        prev: &[T],
        regime: Option<T>,
        rng: &mut RngStream,
        out: &mut [T],
    ) {
        let std = regime.unwrap_or(self.process_std);
        out[0] = model1_mean(prev[0], k) + std * T::lit(rng.standard_normal());
    }

    fn transition_mean(&self, k: usize, prev: &[T], out: &mut [T]) {
        out[0] = model1_mean(prev[0], k);
    }

    fn log_likelihood(&self, _k: usize, x: &[T], y: &[T]) -> T {
        normal_logpdf(y[0], model1_obs_mean(x[0]), self.obs_std)
    }
}

impl<T: Real> GaussianModel<T> for Model1<T> {
    fn initial_mean(&self) -> DVector<T> {
        DVector::zeros(1)
    }

    fn initial_cov(&self) -> DMatrix<T> {
        DMatrix::from_element(1, 1, self.init_std * self.init_std)
    }

    fn process_cov(&self, _k: usize) -> DMatrix<T> {
        DMatrix::from_element(1, 1, self.process_std * self.process_std)
    }

    fn obs_mean(&self, _k: usize, x: &[T]) -> DVector<T> {
        DVector::from_element(1, model1_obs_mean(x[0]))
    }

    fn obs_cov(&self, _k: usize) -> DMatrix<T> {
        DMatrix::from_element(1, 1, self.obs_std * self.obs_std)
    }
}

impl<T: Real> LinearizedModel<T> for Model1<T> {
    fn transition_jacobian(&self, _k: usize, x: &[T]) -> DMatrix<T> {
        DMatrix::from_element(1, 1, model1_mean_derivative(x[0]))
    }

    fn obs_jacobian(&self, _k: usize, x: &[T]) -> DMatrix<T> {
        DMatrix::from_element(1, 1, x[0] / T::lit(10.0))
    }
}

/// Draws `X_0..X_K` and `Y_1..Y_K`. Zero standard deviations give the
/// noise-free recursion.
pub fn simulate_model1<T: Real>(model: &Model1<T>, rng: &mut RngStream) -> Trajectory<T> {
    let mut x = model.init_std * T::lit(rng.standard_normal());
    let mut states = Vec::with_capacity(model.horizon + 1);
    let mut observations = Vec::with_capacity(model.horizon);
    states.push(vec![x]);
    for k in 1..=model.horizon {
        x = model1_mean(x, k) + model.process_std * T::lit(rng.standard_normal());
        let y = model1_obs_mean(x) + model.obs_std * T::lit(rng.standard_normal());
        states.push(vec![x]);
        observations.push(vec![y]);
    }
    Trajectory {
        states,
        observations,
    }
}
