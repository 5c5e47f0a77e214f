use nalgebra::{DMatrix, DVector};

use crate::error::{Result, SmcError};
use crate::scalar::Real;
use crate::ssm::{GaussianModel, LinearizedModel, StateSpaceModel, Trajectory};
use crate::stochastics::{cholesky_with_jitter, GaussianSampler, RngStream, LN_SQRT_2PI};

/// Time-invariant linear-Gaussian model
/// `X_k = F X_{k-1} + W`, `Y_k = H X_k + V`, `W ~ N(0, Q)`, `V ~ N(0, R)`.
///
/// Its exact filter is the Kalman filter, which makes it the reference model
/// for checking every approximate filter. A regime value scales the process
/// noise standard deviation.
#[derive(Debug, Clone)]
pub struct LinearGaussianModel<T: Real> {
    f: DMatrix<T>,
    q: DMatrix<T>,
    h: DMatrix<T>,
    r: DMatrix<T>,
    init: GaussianSampler<T>,
    init_mean: DVector<T>,
    init_cov: DMatrix<T>,
    q_factor: DMatrix<T>,
    r_factor_inv: DMatrix<T>,
    r_factor: DMatrix<T>,
    log_norm: T,
}

impl<T: Real> LinearGaussianModel<T> {
    pub fn new(
        f: DMatrix<T>,
        q: DMatrix<T>,
        h: DMatrix<T>,
        r: DMatrix<T>,
        init_mean: DVector<T>,
        init_cov: DMatrix<T>,
    ) -> Result<Self> {
        let n = f.nrows();
        let d = h.nrows();
        if f.shape() != (n, n)
            || q.shape() != (n, n)
            || h.ncols() != n
            || r.shape() != (d, d)
            || init_mean.len() != n
        {
            return Err(SmcError::Dimension("inconsistent linear model".into()));
        }
        let r_chol = nalgebra::Cholesky::new(r.clone()).ok_or(SmcError::Singular)?;
        let r_factor = r_chol.l();
        let r_factor_inv = r_factor.clone().try_inverse().ok_or(SmcError::Singular)?;
        let log_det_half = (0..d).fold(T::zero(), |acc, i| acc + r_factor[(i, i)].ln());
        Ok(Self {
            q_factor: cholesky_with_jitter(&q)?,
            init: GaussianSampler::new(init_mean.clone(), &init_cov)?,
            f,
            q,
            h,
            r,
            init_mean,
            init_cov,
            r_factor_inv,
            r_factor,
            log_norm: -log_det_half - T::of_usize(d) * T::lit(LN_SQRT_2PI),
        })
    }

    /// Scalar model `X_k = a X_{k-1} + N(0, q)`, `Y_k = c X_k + N(0, r)`.
    pub fn scalar(a: T, q: T, c: T, r: T, m0: T, p0: T) -> Result<Self> {
        let s = |v: T| DMatrix::from_element(1, 1, v);
        Self::new(s(a), s(q), s(c), s(r), DVector::from_element(1, m0), s(p0))
    }

    pub fn f(&self) -> &DMatrix<T> {
        &self.f
    }

    pub fn q(&self) -> &DMatrix<T> {
        &self.q
    }

    pub fn h(&self) -> &DMatrix<T> {
        &self.h
    }

    pub fn r(&self) -> &DMatrix<T> {
        &self.r
    }

    pub fn simulate(&self, horizon: usize, rng: &mut RngStream) -> Trajectory<T> {
        let n = self.f.nrows();
        let d = self.h.nrows();
        let mut x = self.init.sample(rng);
        let mut states = vec![x.as_slice().to_vec()];
        let mut observations = Vec::with_capacity(horizon);
        for k in 1..=horizon {
            let mut next = vec![T::zero(); n];
            self.sample_transition(k, x.as_slice(), None, rng, &mut next);
            x = DVector::from_vec(next);
            let z = DVector::from_fn(d, |_, _| T::lit(rng.standard_normal()));
            let y = &self.h * &x + &self.r_factor * z;
            states.push(x.as_slice().to_vec());
            observations.push(y.as_slice().to_vec());
        }
        Trajectory {
            states,
            observations,
        }
    }
}

impl<T: Real> StateSpaceModel<T> for LinearGaussianModel<T> {
    fn state_dim(&self) -> usize {
        self.f.nrows()
    }

    fn obs_dim(&self) -> usize {
        self.h.nrows()
    }

    fn sample_initial(&self, rng: &mut RngStream, out: &mut [T]) {
        self.init.sample_into(rng, out);
    }

    fn sample_transition(
        &self,
        k: usize,
        prev: &[T],
        regime: Option<T>,
        rng: &mut RngStream,
        out: &mut [T],
    ) {
        let n = self.f.nrows();
        self.transition_mean(k, prev, out);
        let scale = regime.unwrap_or(T::one());
        let z: Vec<T> = (0..n).map(|_| T::lit(rng.standard_normal())).collect();
        for (i, o) in out.iter_mut().enumerate() {
            for (j, zj) in z.iter().enumerate().take(i + 1) {
                *o += scale * self.q_factor[(i, j)] * *zj;
            }
        }
    }

    fn transition_mean(&self, _k: usize, prev: &[T], out: &mut [T]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..prev.len()).fold(T::zero(), |acc, j| acc + self.f[(i, j)] * prev[j]);
        }
    }

    fn log_likelihood(&self, _k: usize, x: &[T], y: &[T]) -> T {
        let d = y.len();
        let resid: Vec<T> = (0..d)
            .map(|i| y[i] - (0..x.len()).fold(T::zero(), |acc, j| acc + self.h[(i, j)] * x[j]))
            .collect();
        let mut quad = T::zero();
        for i in 0..d {
            let zi = (0..=i).fold(T::zero(), |acc, j| {
                acc + self.r_factor_inv[(i, j)] * resid[j]
            });
            quad += zi * zi;
        }
        self.log_norm - T::lit(0.5) * quad
    }
}

impl<T: Real> GaussianModel<T> for LinearGaussianModel<T> {
    fn initial_mean(&self) -> DVector<T> {
        self.init_mean.clone()
    }

    fn initial_cov(&self) -> DMatrix<T> {
        self.init_cov.clone()
    }

    fn process_cov(&self, _k: usize) -> DMatrix<T> {
        self.q.clone()
    }

    fn obs_mean(&self, _k: usize, x: &[T]) -> DVector<T> {
        &self.h * DVector::from_column_slice(x)
    }

    fn obs_cov(&self, _k: usize) -> DMatrix<T> {
        self.r.clone()
    }
}

impl<T: Real> LinearizedModel<T> for LinearGaussianModel<T> {
    fn transition_jacobian(&self, _k: usize, _x: &[T]) -> DMatrix<T> {
        self.f.clone()
    }

    fn obs_jacobian(&self, _k: usize, _x: &[T]) -> DMatrix<T> {
        self.h.clone()
    }
}
