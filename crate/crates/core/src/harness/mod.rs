//! Monte Carlo experiment harness: `S` simulated trajectories, `R` filter
//! repetitions per trajectory, RMSE and timing aggregated per filter and
//! particle count.

mod config;
mod experiment;
mod output;
mod rmse;

pub use config::{ExperimentConfig, FilterName, FilterSpec, ModelKind};
pub use experiment::{run_experiment, simulate_truths, RMSEReport, ReportRow, RunSettings};
pub use output::{
    emit_outputs, read_rmse_by_k, EmitOptions, PLOT_SCRIPT, RMSE_BY_K_HEADER, SUMMARY_HEADER,
    TIMING_HEADER,
};
pub use rmse::{global_rmse, rmse_at_k, RmseAtK};
