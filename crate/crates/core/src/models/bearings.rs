use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SmcError};
use crate::scalar::{wrap_angle, Real};
use crate::ssm::{GaussianModel, LinearizedModel, StateSpaceModel, Trajectory};
use crate::stochastics::{
    wrapped_cauchy_logpdf, wrapped_cauchy_sample, GaussianSampler, RngStream, WrappedCauchyParams,
};

/// Noise input matrix, row-major 4x2.
const G: [[f64; 2]; 4] = [[0.5, 0.0], [0.0, 0.5], [1.0, 0.0], [0.0, 1.0]];

/// Constant-velocity target `(px, py, vx, vy)` seen through its bearing from
/// the origin:
///
/// ```text
/// X_k = F X_{k-1} + sigma_w G W_{k-1},   W ~ N(0, I_2)
/// Y_k = atan2(px, py) + wrapped Cauchy(rho) noise
/// ```
///
/// A regime value replaces `sigma_w`.
#[derive(Debug, Clone)]
pub struct BearingsModel<T: Real> {
    pub horizon: usize,
    pub sigma_w: T,
    noise: WrappedCauchyParams<T>,
    x0_mean: DVector<T>,
    p0: DMatrix<T>,
    init: GaussianSampler<T>,
}

impl<T: Real> BearingsModel<T> {
    pub fn new(
        horizon: usize,
        sigma_w: T,
        rho: T,
        x0_mean: DVector<T>,
        p0: DMatrix<T>,
    ) -> Result<Self> {
        if x0_mean.len() != 4 || p0.shape() != (4, 4) {
            return Err(SmcError::Dimension(
                "bearings model state is 4-dimensional".into(),
            ));
        }
        if !(sigma_w >= T::zero()) {
            return Err(SmcError::InvalidParameter(format!(
                "sigma_w must be nonnegative, got {sigma_w}"
            )));
        }
        Ok(Self {
            horizon,
            sigma_w,
            noise: WrappedCauchyParams::new(T::zero(), rho)?,
            init: GaussianSampler::new(x0_mean.clone(), &p0)?,
            x0_mean,
            p0,
        })
    }

    /// Nominal setup: `sigma_w = 0.001`, `rho = 1 - 0.005^2`, 40 steps.
    pub fn nominal() -> Self {
        Self::with_sigma_w(T::lit(0.001))
    }

    pub fn with_sigma_w(sigma_w: T) -> Self {
        let x0 = DVector::from_vec([-0.05, 0.2, 0.001, -0.055].map(T::lit).to_vec());
        let p0 = DMatrix::from_diagonal(&DVector::from_vec(
            [0.5f64 * 0.5, 0.3 * 0.3, 0.005 * 0.005, 0.01 * 0.01]
                .map(|v| T::lit(0.01 * v))
                .to_vec(),
        ));
        Self::new(40, sigma_w, T::one() - T::lit(0.005 * 0.005), x0, p0)
            .expect("nominal parameters are valid")
    }

    pub fn rho(&self) -> T {
        self.noise.rho()
    }

    pub fn x0_mean(&self) -> &DVector<T> {
        &self.x0_mean
    }

    pub fn p0(&self) -> &DMatrix<T> {
        &self.p0
    }

    /// Constant-velocity transition matrix.
    pub fn f() -> DMatrix<T> {
        let mut f = DMatrix::identity(4, 4);
        f[(0, 2)] = T::one();
        f[(1, 3)] = T::one();
        f
    }

    pub fn g() -> DMatrix<T> {
        DMatrix::from_fn(4, 2, |i, j| T::lit(G[i][j]))
    }

    fn propagate(prev: &[T], out: &mut [T]) {
        out[0] = prev[0] + prev[2];
        out[1] = prev[1] + prev[3];
        out[2] = prev[2];
        out[3] = prev[3];
    }
}

/// Full-quadrant bearing `atan2(px, py)` of the position, in `[-pi, pi)`.
pub fn bearing<T: Real>(x: &[T]) -> Result<T> {
    if x[0] == T::zero() && x[1] == T::zero() {
        return Err(SmcError::BearingAtOrigin);
    }
    Ok(wrap_angle(x[0].atan2(x[1])))
}

impl<T: Real> StateSpaceModel<T> for BearingsModel<T> {
    fn state_dim(&self) -> usize {
        4
    }

    fn obs_dim(&self) -> usize {
        1
    }

    fn sample_initial(&self, rng: &mut RngStream, out: &mut [T]) {
        self.init.sample_into(rng, out);
    }

    fn sample_transition(
        &self,
        _k: usize,
        prev: &[T],
        regime: Option<T>,
        rng: &mut RngStream,
        out: &mut [T],
    ) {
        let sigma = regime.unwrap_or(self.sigma_w);
        let w0 = sigma * T::lit(rng.standard_normal());
        let w1 = sigma * T::lit(rng.standard_normal());
        Self::propagate(prev, out);
        let half = T::lit(0.5);
        out[0] += half * w0;
        out[1] += half * w1;
        out[2] += w0;
        out[3] += w1;
    }

    fn transition_mean(&self, _k: usize, prev: &[T], out: &mut [T]) {
        Self::propagate(prev, out);
    }

    fn log_likelihood(&self, _k: usize, x: &[T], y: &[T]) -> T {
        // atan2(0, 0) = 0: the origin has measure zero under every proposal
        let centre = x[0].atan2(x[1]);
        wrapped_cauchy_logpdf(y[0], &self.noise.recentered(centre))
    }
}

/// Heading-change and ground-truth options for simulating the bearings model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioSpec {
    pub turn: bool,
    /// Step at which the velocity is rotated; `None` means `K / 2`.
    pub turn_time: Option<usize>,
    /// Counterclockwise rotation of the velocity, radians.
    pub turn_angle: f64,
    pub truth_mode: TruthMode,
    /// Process noise of a stochastic truth; `None` uses the model's `sigma_w`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truth_sigma_w: Option<f64>,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        Self {
            turn: false,
            turn_time: None,
            turn_angle: std::f64::consts::FRAC_PI_3,
            truth_mode: TruthMode::ManeuveringDeterministic,
            truth_sigma_w: None,
        }
    }
}

impl ScenarioSpec {
    pub fn straight() -> Self {
        Self::default()
    }

    pub fn with_turn() -> Self {
        Self {
            turn: true,
            ..Self::default()
        }
    }

    pub fn turn_time_for(&self, horizon: usize) -> usize {
        self.turn_time.unwrap_or(horizon / 2)
    }

    pub fn label(&self) -> &'static str {
        if self.turn {
            "turn"
        } else {
            "straight"
        }
    }

    pub fn validate(&self, horizon: usize) -> Result<()> {
        if self.turn {
            let t = self.turn_time_for(horizon);
            if t < 1 || t > horizon {
                return Err(SmcError::InvalidParameter(format!(
                    "turn time {t} outside 1..={horizon}"
                )));
            }
        }
        if self
            .truth_sigma_w
            .is_some_and(|s| !(s.is_finite() && s >= 0.0))
        {
            return Err(SmcError::InvalidParameter(
                "truth sigma_w must be nonnegative".into(),
            ));
        }
        if !self.turn_angle.is_finite() {
            return Err(SmcError::InvalidParameter(
                "turn angle must be finite".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TruthMode {
    /// Truth follows the filter's own dynamics with `sigma_w`.
    Stochastic,
    /// Noise-free constant velocity, plus the optional turn.
    #[default]
    ManeuveringDeterministic,
}

const MAX_RESIMULATIONS: u64 = 64;

/// Draws `X_0..X_K` and `Y_1..Y_K`. A trajectory that hits the origin is
/// discarded and redrawn from the next child stream.
pub fn simulate_model2<T: Real>(
    model: &BearingsModel<T>,
    scenario: &ScenarioSpec,
    rng: &mut RngStream,
) -> Result<Trajectory<T>> {
    scenario.validate(model.horizon)?;
    match simulate_once(model, scenario, rng) {
        Err(SmcError::BearingAtOrigin) => {}
        other => return other,
    }
    for attempt in 0..MAX_RESIMULATIONS {
        log::warn!(
            "bearings trajectory crossed the origin, resimulating (attempt {})",
            attempt + 1
        );
        let mut child = rng.child(attempt);
        match simulate_once(model, scenario, &mut child) {
            Err(SmcError::BearingAtOrigin) => continue,
            other => return other,
        }
    }
    Err(SmcError::BearingAtOrigin)
}

fn simulate_once<T: Real>(
    model: &BearingsModel<T>,
    scenario: &ScenarioSpec,
    rng: &mut RngStream,
) -> Result<Trajectory<T>> {
    let mut x = vec![T::zero(); 4];
    model.sample_initial(rng, &mut x);
    let mut states = Vec::with_capacity(model.horizon + 1);
    let mut observations = Vec::with_capacity(model.horizon);
    states.push(x.clone());
    let truth_sigma = scenario.truth_sigma_w.map(T::lit);
    let turn_at = scenario.turn.then(|| scenario.turn_time_for(model.horizon));
    let (sin, cos) = T::lit(scenario.turn_angle).sin_cos();
    let mut next = vec![T::zero(); 4];
    for k in 1..=model.horizon {
        match scenario.truth_mode {
            TruthMode::Stochastic => model.sample_transition(k, &x, truth_sigma, rng, &mut next),
            TruthMode::ManeuveringDeterministic => model.transition_mean(k, &x, &mut next),
        }
        std::mem::swap(&mut x, &mut next);
        if turn_at == Some(k) {
            let (vx, vy) = (x[2], x[3]);
            x[2] = vx * cos - vy * sin;
            x[3] = vx * sin + vy * cos;
        }
        let centre = bearing(&x)?;
        observations.push(vec![wrapped_cauchy_sample(
            &model.noise.recentered(centre),
            rng,
        )]);
        states.push(x.clone());
    }
    Ok(Trajectory {
        states,
        observations,
    })
}

impl<T: Real> GaussianModel<T> for BearingsModel<T> {
    fn initial_mean(&self) -> DVector<T> {
        self.x0_mean.clone()
    }

    fn initial_cov(&self) -> DMatrix<T> {
        self.p0.clone()
    }

    fn process_cov(&self, _k: usize) -> DMatrix<T> {
        let g = Self::g();
        &g * g.transpose() * (self.sigma_w * self.sigma_w)
    }

    fn obs_mean(&self, _k: usize, x: &[T]) -> DVector<T> {
        DVector::from_element(1, x[0].atan2(x[1]))
    }

    /// Variance `-2 ln rho` of the wrapped normal with the same mean
    /// resultant length.
    fn obs_cov(&self, _k: usize) -> DMatrix<T> {
        DMatrix::from_element(1, 1, -T::lit(2.0) * self.noise.rho().ln())
    }

    fn obs_residual(&self, y: &DVector<T>, yhat: &DVector<T>) -> DVector<T> {
        (y - yhat).map(wrap_angle)
    }
}

impl<T: Real> LinearizedModel<T> for BearingsModel<T> {
    fn transition_jacobian(&self, _k: usize, _x: &[T]) -> DMatrix<T> {
        Self::f()
    }

    fn obs_jacobian(&self, _k: usize, x: &[T]) -> DMatrix<T> {
        let r2 = x[0] * x[0] + x[1] * x[1];
        let mut h = DMatrix::zeros(1, 4);
        if r2 > T::zero() {
            h[(0, 0)] = x[1] / r2;
            h[(0, 1)] = -x[0] / r2;
        }
        h
    }
}

/// Opt-in marker for running the Gaussian filters on the bearings model:
/// the wrapped Cauchy noise is replaced by a Gaussian of matched circular
/// variance. Particle filters see the exact likelihood either way.
#[derive(Debug, Clone)]
pub struct BearingsGaussianApprox<T: Real>(pub BearingsModel<T>);

impl<T: Real> StateSpaceModel<T> for BearingsGaussianApprox<T> {
    fn state_dim(&self) -> usize {
        4
    }

    fn obs_dim(&self) -> usize {
        1
    }

    fn sample_initial(&self, rng: &mut RngStream, out: &mut [T]) {
        self.0.sample_initial(rng, out)
    }

    fn sample_transition(
        &self,
        k: usize,
        prev: &[T],
        regime: Option<T>,
        rng: &mut RngStream,
        out: &mut [T],
    ) {
        self.0.sample_transition(k, prev, regime, rng, out)
    }

    fn transition_mean(&self, k: usize, prev: &[T], out: &mut [T]) {
        self.0.transition_mean(k, prev, out)
    }

    fn log_likelihood(&self, k: usize, x: &[T], y: &[T]) -> T {
        self.0.log_likelihood(k, x, y)
    }
}

impl<T: Real> GaussianModel<T> for BearingsGaussianApprox<T> {
    fn initial_mean(&self) -> DVector<T> {
        self.0.initial_mean()
    }

    fn initial_cov(&self) -> DMatrix<T> {
        self.0.initial_cov()
    }

    fn process_cov(&self, k: usize) -> DMatrix<T> {
        self.0.process_cov(k)
    }

    fn obs_mean(&self, k: usize, x: &[T]) -> DVector<T> {
        self.0.obs_mean(k, x)
    }

    fn obs_cov(&self, k: usize) -> DMatrix<T> {
        self.0.obs_cov(k)
    }

    fn obs_residual(&self, y: &DVector<T>, yhat: &DVector<T>) -> DVector<T> {
        self.0.obs_residual(y, yhat)
    }
}

impl<T: Real> LinearizedModel<T> for BearingsGaussianApprox<T> {
    fn transition_jacobian(&self, k: usize, x: &[T]) -> DMatrix<T> {
        self.0.transition_jacobian(k, x)
    }

    fn obs_jacobian(&self, k: usize, x: &[T]) -> DMatrix<T> {
        self.0.obs_jacobian(k, x)
    }
}
