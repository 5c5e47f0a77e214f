use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};

use clap::{Parser, Subcommand, ValueEnum};
use smc_core::harness::{
    emit_outputs, run_experiment, EmitOptions, ExperimentConfig, RunSettings, PLOT_SCRIPT,
};
use smc_core::models::{
    simulate_model1, simulate_model2, write_trajectory_csv, BearingsModel, Model1, ScenarioSpec,
};
use smc_core::{RngStream, SmcError};

#[derive(Parser)]
#[command(name = "smc-kit", version, about = "Particle filter benchmark sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a sweep described by a JSON config and write CSV results.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
        /// Overrides `master_seed` from the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Leave wall-clock columns empty so output depends only on the seed.
        #[arg(long)]
        no_timing: bool,
    },
    /// Simulate one ground-truth trajectory and its observations.
    Simulate {
        #[arg(long, value_enum)]
        model: ModelArg,
        /// Bearings model only: rotate the velocity halfway through.
        #[arg(long)]
        turn: bool,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Horizon; defaults to 50 for m1 and 40 for m2.
        #[arg(long = "K")]
        k: Option<usize>,
    },
    /// Render charts from the CSVs of a finished run.
    Plot {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    M1,
    M2,
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<SmcError> for Failure {
    fn from(e: SmcError) -> Self {
        match e {
            SmcError::Config(_) | SmcError::InvalidParameter(_) => Failure::Config(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

fn run(
    config: &Path,
    out: &Path,
    workers: Option<usize>,
    seed: Option<u64>,
    no_timing: bool,
) -> Result<(), Failure> {
    let config = match ExperimentConfig::from_path(config) {
        Err(e @ SmcError::Io { .. }) => return Err(Failure::Config(e.to_string())),
        other => other?,
    };
    if workers == Some(0) {
        return Err(Failure::Config("--workers must be at least 1".into()));
    }
    let report = run_experiment(&config, &RunSettings { workers, seed }).map_err(|e| match e {
        SmcError::Config(m) => Failure::Config(m),
        e => Failure::Runtime(e.to_string()),
    })?;
    for row in report.rows.iter().filter(|r| r.failures > 0) {
        log::warn!(
            "{} N={:?}: {} of {} runs failed",
            row.filter,
            row.n,
            row.failures,
            row.runs
        );
    }
    emit_outputs(&report, out, &EmitOptions { timing: !no_timing })
        .map_err(|e| Failure::Runtime(e.to_string()))
}

fn simulate(
    model: ModelArg,
    turn: bool,
    seed: u64,
    out: &Path,
    k: Option<usize>,
) -> Result<(), Failure> {
    let mut rng = RngStream::new(seed);
    let traj = match model {
        ModelArg::M1 => {
            if turn {
                return Err(Failure::Config("--turn applies to m2 only".into()));
            }
            let spec = Model1::<f64> {
                horizon: k.unwrap_or(50),
                ..Model1::default()
            };
            simulate_model1(&spec, &mut rng)
        }
        ModelArg::M2 => {
            let mut spec = BearingsModel::<f64>::nominal();
            spec.horizon = k.unwrap_or(40);
            let scenario = if turn {
                ScenarioSpec::with_turn()
            } else {
                ScenarioSpec::straight()
            };
            simulate_model2(&spec, &scenario, &mut rng)?
        }
    };
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Failure::Runtime(format!("{}: {e}", dir.display())))?;
    }
    let file =
        fs::File::create(out).map_err(|e| Failure::Runtime(format!("{}: {e}", out.display())))?;
    write_trajectory_csv(&traj, file).map_err(|e| Failure::Runtime(e.to_string()))
}

fn plot(dir: &Path) -> Result<(), Failure> {
    if !dir.join("summary.csv").is_file() {
        return Err(Failure::Config(format!(
            "{} has no summary.csv",
            dir.display()
        )));
    }
    let script = dir.join("plot.py");
    if !script.is_file() {
        fs::write(&script, PLOT_SCRIPT)
            .map_err(|e| Failure::Runtime(format!("{}: {e}", script.display())))?;
    }
    let status = Command::new("python3")
        .arg(&script)
        .arg(dir)
        .status()
        .map_err(|e| Failure::Runtime(format!("python3: {e}")))?;
    if status.success() {
        Ok(())
    } else {
        Err(Failure::Runtime(format!(
            "plot script exited with {status}"
        )))
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Cmd::Run {
            config,
            out,
            workers,
            seed,
            no_timing,
        } => run(&config, &out, workers, seed, no_timing),
        Cmd::Simulate {
            model,
            turn,
            seed,
            out,
            k,
        } => simulate(model, turn, seed, &out, k),
        Cmd::Plot { input } => plot(&input),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("configuration error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
