//! State-space model interfaces.
//!
//! Time indices follow the filtering convention: `sample_transition(k, ..)`
//! draws `X_k` given `X_{k-1}`, and `log_likelihood(k, ..)` scores `Y_k`
//! against a candidate `X_k`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, SmcError};
use crate::scalar::Real;
use crate::stochastics::RngStream;

/// Behavioral description of a hidden Markov model, enough for particle
/// filtering: sample the prior and the dynamics, evaluate the likelihood.
pub trait StateSpaceModel<T: Real>: Send + Sync {
    fn state_dim(&self) -> usize;

    fn obs_dim(&self) -> usize;

    /// Draw `X_0`.
    fn sample_initial(&self, rng: &mut RngStream, out: &mut [T]);

    /// Draw `X_k | X_{k-1} = prev`. `regime` overrides the model's nominal
    /// noise parameter; `None` means nominal.
    fn sample_transition(
        &self,
        k: usize,
        prev: &[T],
        regime: Option<T>,
        rng: &mut RngStream,
        out: &mut [T],
    );

    /// `E[X_k | X_{k-1} = prev]`.
    fn transition_mean(&self, k: usize, prev: &[T], out: &mut [T]);

    /// `ln p(y_k | X_k = x)`, up to an additive constant shared by all `x`.
    /// Returns `-inf` only where the density is exactly zero.
    fn log_likelihood(&self, k: usize, x: &[T], y: &[T]) -> T;
}

/// Moments needed by the unscented filter.
pub trait GaussianModel<T: Real>: StateSpaceModel<T> {
    fn initial_mean(&self) -> DVector<T>;

    fn initial_cov(&self) -> DMatrix<T>;

    /// Effective process covariance `G Q G^T` of the step `k-1 -> k`.
    fn process_cov(&self, k: usize) -> DMatrix<T>;

    /// `h_k(x)`.
    fn obs_mean(&self, k: usize, x: &[T]) -> DVector<T>;

    fn obs_cov(&self, k: usize) -> DMatrix<T>;

    /// Innovation `y - yhat`; angular observations override this to wrap.
    fn obs_residual(&self, y: &DVector<T>, yhat: &DVector<T>) -> DVector<T> {
        y - yhat
    }
}

/// Jacobians for the extended filter.
pub trait LinearizedModel<T: Real>: GaussianModel<T> {
    /// Jacobian of `transition_mean(k, .)` at `x`.
    fn transition_jacobian(&self, k: usize, x: &[T]) -> DMatrix<T>;

    /// Jacobian of `obs_mean(k, .)` at `x`.
    fn obs_jacobian(&self, k: usize, x: &[T]) -> DMatrix<T>;
}

/// Finite set of candidate values for the regime parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct RegimeSet<T> {
    values: Vec<T>,
}

impl<T: Real> RegimeSet<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(SmcError::EmptySet);
        }
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(SmcError::InvalidParameter(format!("regime {i} is {v}")));
            }
            if values[..i].contains(v) {
                return Err(SmcError::InvalidParameter(format!(
                    "duplicate regime value {v}"
                )));
            }
        }
        Ok(Self { values })
    }

    /// `{0.0005, 0.001, 0.003, 0.005}`: process-noise scales for the
    /// bearings-only benchmark.
    pub fn bearings_default() -> Self {
        Self::new(
            [0.0005, 0.001, 0.003, 0.005]
                .into_iter()
                .map(T::lit)
                .collect(),
        )
        .expect("distinct")
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn get(&self, index: usize) -> T {
        self.values[index]
    }

    pub fn index_of(&self, value: T) -> Option<usize> {
        self.values.iter().position(|v| *v == value)
    }
}

/// Simulated ground truth: `states` holds `X_0..X_K`, `observations` holds
/// `Y_1..Y_K`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub states: Vec<Vec<T>>,
    pub observations: Vec<Vec<T>>,
}

impl<T: Real> Trajectory<T> {
    pub fn horizon(&self) -> usize {
        self.observations.len()
    }
}
