use std::fs;
use std::path::Path;

use super::experiment::{RMSEReport, ReportRow};
use super::rmse::global_rmse;
use crate::error::{Result, SmcError};

pub const SUMMARY_HEADER: &str =
    "filter,model,scenario,sigma_w,N,global_rmse,mean_wall_ms,failures";
pub const RMSE_BY_K_HEADER: &str = "filter,model,scenario,sigma_w,N,k,rmse_k";
pub const TIMING_HEADER: &str =
    "filter,model,scenario,sigma_w,N,runs,mean_wall_ms,median_wall_ms,min_wall_ms,max_wall_ms";

/// Renders RMSE-vs-N, RMSE_k-vs-k and time-vs-N charts from the CSVs next to it.
pub const PLOT_SCRIPT: &str = include_str!("plot.py");

#[derive(Debug, Clone, Copy)]
pub struct EmitOptions {
    /// Write wall-clock columns. When off they are left empty, which makes the
    /// files a pure function of the configuration and seed.
    pub timing: bool,
}

impl Default for EmitOptions {
    fn default() -> Self {
        Self { timing: true }
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn key(report: &RMSEReport, row: &ReportRow) -> Vec<String> {
    vec![
        row.filter.clone(),
        report.model.clone(),
        report.scenario.clone(),
        opt(row.sigma_w),
        opt(row.n),
    ]
}

fn write_csv(path: &Path, header: &str, rows: Vec<Vec<String>>) -> Result<()> {
    let io = |e: std::io::Error| SmcError::io(path, e);
    let mut w = csv::Writer::from_writer(fs::File::create(path).map_err(io)?);
    let to_err = |e: csv::Error| SmcError::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    w.write_record(header.split(',')).map_err(to_err)?;
    for row in rows {
        w.write_record(&row).map_err(to_err)?;
    }
    w.flush().map_err(io)
}

/// Writes `summary.csv`, `rmse_by_k.csv`, `timing.csv` and `plot.py` into `dir`,
/// creating it if needed.
pub fn emit_outputs(report: &RMSEReport, dir: &Path, options: &EmitOptions) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| SmcError::io(dir, e))?;
    let timed = |v: f64| {
        if options.timing {
            v.to_string()
        } else {
            String::new()
        }
    };

    let summary = report
        .rows
        .iter()
        .map(|row| {
            let mut r = key(report, row);
            r.extend([
                row.global_rmse.to_string(),
                timed(row.mean_wall_ms()),
                row.failures.to_string(),
            ]);
            r
        })
        .collect();
    write_csv(&dir.join("summary.csv"), SUMMARY_HEADER, summary)?;

    let by_k = report
        .rows
        .iter()
        .flat_map(|row| {
            row.rmse_k.iter().enumerate().map(move |(k, v)| {
                let mut r = key(report, row);
                r.extend([(k + 1).to_string(), v.to_string()]);
                r
            })
        })
        .collect();
    write_csv(&dir.join("rmse_by_k.csv"), RMSE_BY_K_HEADER, by_k)?;

    let timing = report
        .rows
        .iter()
        .map(|row| {
            let mut r = key(report, row);
            r.extend([
                row.runs.to_string(),
                timed(row.mean_wall_ms()),
                timed(row.median_wall_ms()),
                timed(row.min_wall_ms()),
                timed(row.max_wall_ms()),
            ]);
            r
        })
        .collect();
    write_csv(&dir.join("timing.csv"), TIMING_HEADER, timing)?;

    let script = dir.join("plot.py");
    fs::write(&script, PLOT_SCRIPT).map_err(|e| SmcError::io(&script, e))
}

/// Rebuilds the per-step RMSE curves from `rmse_by_k.csv`. Timing and failure
/// fields of the returned rows are empty.
pub fn read_rmse_by_k(path: &Path) -> Result<RMSEReport> {
    let perr = |message: String| SmcError::Parse {
        path: path.display().to_string(),
        message,
    };
    let file = fs::File::open(path).map_err(|e| SmcError::io(path, e))?;
    let mut rdr = csv::Reader::from_reader(file);
    let header = rdr
        .headers()
        .map_err(|e| perr(e.to_string()))?
        .iter()
        .collect::<Vec<_>>()
        .join(",");
    if header != RMSE_BY_K_HEADER {
        return Err(perr(format!("unexpected header {header}")));
    }
    let mut report = RMSEReport::empty("", "", 0);
    for record in rdr.records() {
        let rec = record.map_err(|e| perr(e.to_string()))?;
        let num = |i: usize| {
            rec[i]
                .parse::<f64>()
                .map_err(|_| perr(format!("bad number {:?}", &rec[i])))
        };
        let sigma_w = if rec[3].is_empty() {
            None
        } else {
            Some(num(3)?)
        };
        let n = if rec[4].is_empty() {
            None
        } else {
            Some(
                rec[4]
                    .parse::<usize>()
                    .map_err(|_| perr(format!("bad N {:?}", &rec[4])))?,
            )
        };
        let k = rec[5]
            .parse::<usize>()
            .map_err(|_| perr(format!("bad k {:?}", &rec[5])))?;
        report.model = rec[1].to_string();
        report.scenario = rec[2].to_string();
        let same = |r: &ReportRow| {
            r.filter == rec[0] && r.n == n && r.sigma_w == sigma_w && r.rmse_k.len() + 1 == k
        };
        match report.rows.last_mut() {
            Some(row) if same(row) => row.rmse_k.push(num(6)?),
            _ if k == 1 => report.rows.push(ReportRow {
                filter: rec[0].to_string(),
                sigma_w,
                n,
                rmse_k: vec![num(6)?],
                global_rmse: f64::NAN,
                wall_ms: Vec::new(),
                runs: 0,
                failures: 0,
            }),
            _ => return Err(perr(format!("rows for {} out of order at k={k}", &rec[0]))),
        }
    }
    for row in &mut report.rows {
        row.global_rmse = global_rmse(&row.rmse_k)?;
    }
    report.horizon = report.rows.first().map_or(0, |r| r.rmse_k.len());
    Ok(report)
}
