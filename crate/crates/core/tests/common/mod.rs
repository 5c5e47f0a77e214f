#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use smc_core::models::LinearGaussianModel;
use smc_core::stochastics::normal_logpdf;
use smc_core::{
    kalman_step, run_filter, FilterKind, FilterOptions, GaussianBelief, GaussianModel, RngStream,
    StateSpaceModel,
};

/// `X_k = X_{k-1} + m + noise_std W`, `Y_k = X_k + obs_std V`. The regime
/// value `m` is a drift so regime effects are visible without noise. A
/// `flat` model returns a constant likelihood.
#[derive(Clone, Copy)]
pub struct Drift {
    pub noise_std: f64,
    pub obs_std: f64,
    pub init_std: f64,
    pub flat: bool,
}

impl Drift {
    pub fn new(noise_std: f64, obs_std: f64) -> Self {
        Self {
            noise_std,
            obs_std,
            init_std: 1.0,
            flat: false,
        }
    }
}

impl StateSpaceModel<f64> for Drift {
    fn state_dim(&self) -> usize {
        1
    }

    fn obs_dim(&self) -> usize {
        1
    }

    fn sample_initial(&self, rng: &mut RngStream, out: &mut [f64]) {
        out[0] = self.init_std * rng.standard_normal();
    }

    fn sample_transition(
        &self,
        _k: usize,
        prev: &[f64],
        regime: Option<f64>,
        rng: &mut RngStream,
        out: &mut [f64],
    ) {
        out[0] = prev[0] + regime.unwrap_or(0.0) + self.noise_std * rng.standard_normal();
    }

    fn transition_mean(&self, _k: usize, prev: &[f64], out: &mut [f64]) {
        out[0] = prev[0];
    }

    fn log_likelihood(&self, _k: usize, x: &[f64], y: &[f64]) -> f64 {
        if self.flat {
            -1.5
        } else {
            normal_logpdf(y[0], x[0], self.obs_std)
        }
    }
}

/// Scalar model `X_k = 0.9 X_{k-1} + N(0,1)`, `Y_k = X_k + N(0,1)`, `X_0 ~ N(0,1)`.
pub fn scalar_linear() -> LinearGaussianModel<f64> {
    LinearGaussianModel::scalar(0.9, 1.0, 1.0, 1.0, 0.0, 1.0).unwrap()
}

pub fn observations(model: &LinearGaussianModel<f64>, horizon: usize, seed: u64) -> Vec<Vec<f64>> {
    model
        .simulate(horizon, &mut RngStream::new(seed))
        .observations
}

/// Exact Kalman filter beliefs at `k = 1..K`.
pub fn kalman_beliefs(
    model: &LinearGaussianModel<f64>,
    ys: &[Vec<f64>],
) -> Vec<GaussianBelief<f64>> {
    let mut belief = GaussianBelief::new(0, model.initial_mean(), model.initial_cov()).unwrap();
    ys.iter()
        .map(|y| {
            belief = kalman_step(
                model.f(),
                model.q(),
                model.h(),
                model.r(),
                &belief,
                &DVector::from_column_slice(y),
            )
            .unwrap();
            belief.clone()
        })
        .collect()
}

fn update(
    m: &DVector<f64>,
    p: &DMatrix<f64>,
    h: &DMatrix<f64>,
    r: &DMatrix<f64>,
    y: &[f64],
) -> (DVector<f64>, DMatrix<f64>) {
    let s = h * p * h.transpose() + r;
    let gain = p * h.transpose() * s.try_inverse().unwrap();
    let m = m + &gain * (DVector::from_column_slice(y) - h * m);
    let p = p - &gain * h * p;
    (m, p)
}

/// Law targeted by the predictive smoother on a linear-Gaussian model. The
/// resampled cloud of step `k-1` is propagated, weighted by the likelihood of
/// `y_k` and by that of `y_{k+1}` at the offspring. With a deterministic
/// offspring `F x` the second factor is `N(y_{k+1}; H F x, R)`; with a sampled
/// offspring its conditional expectation is `N(y_{k+1}; H F x, H Q H' + R)`.
pub fn pbps_law(
    model: &LinearGaussianModel<f64>,
    ys: &[Vec<f64>],
    stochastic: bool,
) -> Vec<(DVector<f64>, DMatrix<f64>)> {
    let (f, q, h, r) = (model.f(), model.q(), model.h(), model.r());
    let hf = h * f;
    let r_next = if stochastic {
        h * q * h.transpose() + r
    } else {
        r.clone()
    };
    let mut m = model.initial_mean();
    let mut p = model.initial_cov();
    let mut out = Vec::new();
    for k in 0..ys.len() {
        m = f * &m;
        p = f * &p * f.transpose() + q;
        (m, p) = update(&m, &p, h, r, &ys[k]);
        if k + 1 < ys.len() {
            (m, p) = update(&m, &p, &hf, &r_next, &ys[k + 1]);
        }
        out.push((m.clone(), p.clone()));
    }
    out
}

/// Per-step Monte Carlo standard error of a filter's first state coordinate
/// at `n` particles, scaled from the spread of `reps` independent runs at
/// `rep_n` particles.
pub fn replicate_se(
    model: &dyn StateSpaceModel<f64>,
    ys: &[Vec<f64>],
    kind: FilterKind,
    n: usize,
    rep_n: usize,
    reps: u64,
    rng: &RngStream,
) -> Vec<f64> {
    let runs: Vec<Vec<f64>> = (0..reps)
        .map(|r| {
            let out = run_filter(
                model,
                ys,
                rep_n,
                kind,
                &FilterOptions::default(),
                &mut rng.child(r),
            )
            .unwrap();
            out.estimates.iter().map(|e| e[0]).collect()
        })
        .collect();
    (0..ys.len())
        .map(|k| {
            let mean = runs.iter().map(|r| r[k]).sum::<f64>() / reps as f64;
            let var = runs.iter().map(|r| (r[k] - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
            (var * rep_n as f64 / n as f64).sqrt()
        })
        .collect()
}

/// Fraction of steps with `|estimate - target| <= 3 se`.
pub fn fraction_within(estimates: &[Vec<f64>], targets: &[f64], se: &[f64]) -> f64 {
    let hits = estimates
        .iter()
        .zip(targets.iter().zip(se))
        .filter(|(e, (t, s))| (e[0] - *t).abs() <= 3.0 * *s)
        .count();
    hits as f64 / targets.len() as f64
}

/// Wraps a model so that propagation copies the previous state; the
/// likelihood and the transition mean are those of the inner model.
pub struct Frozen<M>(pub M);

impl<M: StateSpaceModel<f64>> StateSpaceModel<f64> for Frozen<M> {
    fn state_dim(&self) -> usize {
        self.0.state_dim()
    }

    fn obs_dim(&self) -> usize {
        self.0.obs_dim()
    }

    fn sample_initial(&self, rng: &mut RngStream, out: &mut [f64]) {
        self.0.sample_initial(rng, out)
    }

    fn sample_transition(
        &self,
        _k: usize,
        prev: &[f64],
        _regime: Option<f64>,
        _rng: &mut RngStream,
        out: &mut [f64],
    ) {
        out.copy_from_slice(prev)
    }

    fn transition_mean(&self, k: usize, prev: &[f64], out: &mut [f64]) {
        self.0.transition_mean(k, prev, out)
    }

    fn log_likelihood(&self, k: usize, x: &[f64], y: &[f64]) -> f64 {
        self.0.log_likelihood(k, x, y)
    }
}
