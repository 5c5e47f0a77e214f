//! Benchmark state-space models and their ground-truth simulators.

mod bearings;
mod linear;
mod model1;
mod trajectory_csv;

pub use bearings::{
    bearing, simulate_model2, BearingsGaussianApprox, BearingsModel, ScenarioSpec, TruthMode,
};
pub use linear::LinearGaussianModel;
pub use model1::{model1_mean, model1_mean_derivative, model1_obs_mean, simulate_model1, Model1};
pub use trajectory_csv::{read_trajectory_csv, write_trajectory_csv};
