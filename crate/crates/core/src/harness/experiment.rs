use std::time::Instant;

use rayon::prelude::*;

use super::config::{ExperimentConfig, FilterName, FilterSpec, ModelKind};
use super::rmse::{global_rmse, rmse_at_k};
use crate::error::{Result, SmcError};
use crate::filters::{run_particle_filter, FilterOptions, ParticleAlgorithm};
use crate::gaussian::{run_ekf, run_ukf, GaussianBelief};
use crate::models::{
    simulate_model1, simulate_model2, BearingsGaussianApprox, BearingsModel, Model1,
};
use crate::ssm::{LinearizedModel, Trajectory};
use crate::stochastics::RngStream;

/// Execution knobs that do not change the results.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunSettings {
    /// Worker threads; `None` uses every available core.
    pub workers: Option<usize>,
    /// Replaces the config's `master_seed` when set.
    pub seed: Option<u64>,
}

/// Aggregates for one (filter, N) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub filter: String,
    pub sigma_w: Option<f64>,
    /// `None` for the Gaussian filters.
    pub n: Option<usize>,
    /// `RMSE_k` for `k = 1..K`.
    pub rmse_k: Vec<f64>,
    pub global_rmse: f64,
    /// Wall-clock milliseconds of every completed run.
    pub wall_ms: Vec<f64>,
    pub runs: usize,
    pub failures: usize,
}

impl ReportRow {
    pub fn mean_wall_ms(&self) -> f64 {
        if self.wall_ms.is_empty() {
            return f64::NAN;
        }
        self.wall_ms.iter().sum::<f64>() / self.wall_ms.len() as f64
    }

    pub fn median_wall_ms(&self) -> f64 {
        let mut v = self.wall_ms.clone();
        if v.is_empty() {
            return f64::NAN;
        }
        v.sort_by(f64::total_cmp);
        let m = v.len() / 2;
        if v.len() % 2 == 1 {
            v[m]
        } else {
            0.5 * (v[m - 1] + v[m])
        }
    }

    pub fn min_wall_ms(&self) -> f64 {
        self.wall_ms.iter().copied().fold(f64::NAN, f64::min)
    }

    pub fn max_wall_ms(&self) -> f64 {
        self.wall_ms.iter().copied().fold(f64::NAN, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RMSEReport {
    pub model: String,
    pub scenario: String,
    pub horizon: usize,
    pub rows: Vec<ReportRow>,
}

impl RMSEReport {
    pub fn empty(model: &str, scenario: &str, horizon: usize) -> Self {
        Self {
            model: model.into(),
            scenario: scenario.into(),
            horizon,
            rows: Vec::new(),
        }
    }

    /// First row with this filter label and particle count.
    pub fn row(&self, filter: &str, n: Option<usize>) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.filter == filter && r.n == n)
    }
}

/// The `S` ground-truth trajectories of a sweep, trajectory `s` drawn from
/// the stream `(seed, 0, s)`.
pub fn simulate_truths(config: &ExperimentConfig, seed: u64) -> Result<Vec<Trajectory<f64>>> {
    let master = RngStream::new(seed);
    let horizon = config.horizon();
    (0..config.s)
        .map(|s| {
            let mut rng = master.descend(&[0, s as u64]);
            match config.model {
                ModelKind::M1 => Ok(simulate_model1(
                    &Model1 {
                        horizon,
                        ..Model1::default()
                    },
                    &mut rng,
                )),
                ModelKind::M2 => {
                    let mut model = BearingsModel::nominal();
                    model.horizon = horizon;
                    simulate_model2(&model, &config.scenario_spec(), &mut rng)
                }
            }
        })
        .collect()
}

enum FilterModel {
    Growth(Model1<f64>),
    Bearings(BearingsModel<f64>),
    BearingsApprox(BearingsGaussianApprox<f64>),
}

fn filter_model(config: &ExperimentConfig, spec: &FilterSpec) -> FilterModel {
    match config.model {
        ModelKind::M1 => FilterModel::Growth(Model1 {
            horizon: config.horizon(),
            ..Model1::default()
        }),
        ModelKind::M2 => {
            let mut m = BearingsModel::with_sigma_w(spec.sigma_w.unwrap_or(0.001));
            m.horizon = config.horizon();
            if spec.gaussian_approx {
                FilterModel::BearingsApprox(BearingsGaussianApprox(m))
            } else {
                FilterModel::Bearings(m)
            }
        }
    }
}

struct Cell {
    filter: usize,
    n: Option<usize>,
    s: usize,
    r: usize,
}

struct CellResult {
    estimates: Option<Vec<Vec<f64>>>,
    wall_ms: f64,
}

struct Plan {
    spec: FilterSpec,
    model: FilterModel,
    algorithm: Option<ParticleAlgorithm<f64>>,
    opts: FilterOptions,
}

fn run_cell_on<M: LinearizedModel<f64>>(
    model: &M,
    plan: &Plan,
    cell: &Cell,
    truth: &Trajectory<f64>,
    rng: &mut RngStream,
) -> Result<CellResult> {
    let obs = &truth.observations;
    let Some(algorithm) = &plan.algorithm else {
        let start = Instant::now();
        let beliefs = match plan.spec.name {
            FilterName::Ekf => run_ekf(model, obs),
            _ => run_ukf(model, obs, &plan.spec.ut.unwrap_or_default()),
        };
        let wall_ms = start.elapsed().as_secs_f64() * 1e3;
        return match beliefs {
            Ok(b) => Ok(CellResult {
                estimates: Some(
                    b.into_iter()
                        .map(|GaussianBelief { mean, .. }| mean.as_slice().to_vec())
                        .collect(),
                ),
                wall_ms,
            }),
            Err(e @ (SmcError::Singular | SmcError::NotPositiveDefinite)) => {
                log::warn!(
                    "{} failed on trajectory {}: {e}",
                    plan.spec.name.label(),
                    cell.s
                );
                Ok(CellResult {
                    estimates: None,
                    wall_ms,
                })
            }
            Err(e) => Err(e),
        };
    };
    let n = cell.n.expect("particle cells carry N");
    let out = run_particle_filter(model, obs, n, algorithm, &plan.opts, rng)?;
    let wall_ms = out.wall_time.as_secs_f64() * 1e3;
    if let Some(e) = &out.failure {
        log::warn!(
            "{} N={n} s={} r={}: {e}",
            plan.spec.name.label(),
            cell.s,
            cell.r
        );
        return Ok(CellResult {
            estimates: None,
            wall_ms,
        });
    }
    Ok(CellResult {
        estimates: Some(out.estimates),
        wall_ms,
    })
}

/// Runs every (filter, N, s, r) cell. Cell `(f, N, s, r)` uses the stream
/// `(seed, 1, f, N, s, r)`, so the report does not depend on the number of
/// workers or on the order in which cells finish.
pub fn run_experiment(config: &ExperimentConfig, settings: &RunSettings) -> Result<RMSEReport> {
    config.validate()?;
    let seed = settings.seed.unwrap_or(config.master_seed);
    let truths = simulate_truths(config, seed)?;
    let master = RngStream::new(seed);

    let plans: Vec<Plan> = config
        .filters
        .iter()
        .map(|spec| {
            let regimes = spec.regime_set(config.model)?;
            let algorithm = spec.kind().map(|kind| match (spec.name, regimes) {
                (FilterName::DmaBpf, Some(m)) => ParticleAlgorithm::DmaBpf(m),
                (_, Some(m)) => ParticleAlgorithm::RegimeSwitching(kind, m),
                (_, None) => ParticleAlgorithm::Standard(kind),
            });
            let opts = FilterOptions {
                scheme: spec.resampling.unwrap_or_default(),
                ..FilterOptions::default()
            };
            Ok(Plan {
                spec: spec.clone(),
                model: filter_model(config, spec),
                algorithm,
                opts,
            })
        })
        .collect::<Result<_>>()?;

    let mut groups = Vec::new();
    for (f, plan) in plans.iter().enumerate() {
        if plan.algorithm.is_some() {
            groups.extend(config.n_values.iter().map(|&n| (f, Some(n))));
        } else {
            groups.push((f, None));
        }
    }
    let cells: Vec<Cell> = groups
        .iter()
        .flat_map(|&(filter, n)| {
            let reps = if n.is_some() { config.r } else { 1 };
            (0..config.s).flat_map(move |s| (0..reps).map(move |r| Cell { filter, n, s, r }))
        })
        .collect();

    let run = |cell: &Cell| -> Result<CellResult> {
        let plan = &plans[cell.filter];
        let path = [
            1,
            cell.filter as u64,
            cell.n.unwrap_or(0) as u64,
            cell.s as u64,
            cell.r as u64,
        ];
        let mut rng = master.descend(&path);
        let truth = &truths[cell.s];
        match &plan.model {
            FilterModel::Growth(m) => run_cell_on(m, plan, cell, truth, &mut rng),
            FilterModel::Bearings(m) => run_cell_on(m, plan, cell, truth, &mut rng),
            FilterModel::BearingsApprox(m) => run_cell_on(m, plan, cell, truth, &mut rng),
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = settings.workers {
        builder = builder.num_threads(w.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| SmcError::InvalidParameter(format!("thread pool: {e}")))?;
    let results: Vec<CellResult> =
        pool.install(|| cells.par_iter().map(run).collect::<Result<Vec<_>>>())?;

    let horizon = config.horizon();
    let mut report = RMSEReport::empty(config.model.name(), config.scenario_label(), horizon);
    let mut offset = 0;
    for &(f, n) in &groups {
        let plan = &plans[f];
        let reps = if n.is_some() { config.r } else { 1 };
        let block = &results[offset..offset + config.s * reps];
        offset += block.len();
        let by_s: Vec<&[CellResult]> = block.chunks(reps).collect();
        let mut rmse_k = Vec::with_capacity(horizon);
        for k in 0..horizon {
            let est: Vec<Vec<Option<Vec<f64>>>> = by_s
                .iter()
                .map(|runs| {
                    runs.iter()
                        .map(|c| c.estimates.as_ref().map(|e| e[k].clone()))
                        .collect()
                })
                .collect();
            let states: Vec<Vec<f64>> = truths.iter().map(|t| t.states[k + 1].clone()).collect();
            rmse_k.push(rmse_at_k(&est, &states)?.rmse);
        }
        let completed: Vec<&CellResult> = block.iter().filter(|c| c.estimates.is_some()).collect();
        report.rows.push(ReportRow {
            filter: plan.spec.name.label().to_string(),
            sigma_w: match config.model {
                ModelKind::M2 if !plan.spec.name.uses_regimes() => {
                    Some(plan.spec.sigma_w.unwrap_or(0.001))
                }
                _ => None,
            },
            n,
            global_rmse: global_rmse(&rmse_k)?,
            rmse_k,
            wall_ms: completed.iter().map(|c| c.wall_ms).collect(),
            runs: block.len(),
            failures: block.len() - completed.len(),
        });
    }
    Ok(report)
}
