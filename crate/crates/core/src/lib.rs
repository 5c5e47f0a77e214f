//! Sequential Monte Carlo state estimation.
//!
//! Bootstrap and auxiliary particle filters, a one-step predictive particle
//! smoother that scores each particle against the next observation as well
//! as the current one, regime-switching and model-averaging variants for
//! model mismatch, Kalman/extended/unscented baselines, the two benchmark
//! models and an experiment harness that sweeps filters over particle counts.
//!
//! Numerical code is generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases at the crate root fix the scalar to `f64`, which is what the
//! harness uses.

pub mod cloud;
pub mod error;
pub mod filters;
pub mod gaussian;
pub mod harness;
pub mod models;
pub mod scalar;
pub mod ssm;
pub mod stochastics;

pub use cloud::{
    effective_sample_size, normalize_log_weights, posterior_mean, resample, ParticleCloud,
    ResamplingScheme,
};
pub use error::{Result, SmcError, WeightStage};
pub use filters::{
    apf_step, bpf_step, dma_bpf_step, pbps_step, rs_step, run_filter, run_particle_filter,
    FilterKind, FilterOptions, FilterOutput, OffspringMode, ParticleAlgorithm, StepOutput,
};
pub use gaussian::{
    ekf_step, kalman_step, sigma_points, ukf_step, GaussianBelief, UtForm, UtParams,
};
pub use scalar::Real;
pub use ssm::{GaussianModel, LinearizedModel, RegimeSet, StateSpaceModel, Trajectory};
pub use stochastics::{RngStream, WrappedCauchyParams};

pub type ParticleCloudF64 = ParticleCloud<f64>;
pub type ParticleCloudF32 = ParticleCloud<f32>;
pub type RegimeSetF64 = RegimeSet<f64>;
pub type GaussianBeliefF64 = GaussianBelief<f64>;
pub type GaussianBeliefF32 = GaussianBelief<f32>;
pub type FilterOutputF64 = FilterOutput<f64>;
pub type TrajectoryF64 = Trajectory<f64>;
pub type Model1F64 = models::Model1<f64>;
pub type BearingsModelF64 = models::BearingsModel<f64>;
pub type LinearGaussianF64 = models::LinearGaussianModel<f64>;
