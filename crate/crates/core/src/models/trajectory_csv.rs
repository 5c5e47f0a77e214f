use std::io::{Read, Write};

use crate::error::{Result, SmcError};
use crate::scalar::Real;
use crate::ssm::Trajectory;

fn parse_error(message: String) -> SmcError {
    SmcError::Parse {
        path: "<trajectory csv>".into(),
        message,
    }
}

/// Writes `k,x0..,y0..`; the `k = 0` row leaves the observation fields empty.
pub fn write_trajectory_csv<T: Real, W: Write>(traj: &Trajectory<T>, out: W) -> Result<()> {
    let n = traj.states.first().map_or(0, Vec::len);
    let d = traj.observations.first().map_or(0, Vec::len);
    if traj.states.len() != traj.observations.len() + 1 {
        return Err(SmcError::Dimension(
            "trajectory needs K+1 states and K observations".into(),
        ));
    }
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["k".to_string()];
    header.extend((0..n).map(|j| format!("x{j}")));
    header.extend((0..d).map(|j| format!("y{j}")));
    let csv_err = |e: csv::Error| parse_error(e.to_string());
    w.write_record(&header).map_err(csv_err)?;
    for (k, x) in traj.states.iter().enumerate() {
        let mut row = vec![k.to_string()];
        row.extend(x.iter().map(T::to_string));
        match k.checked_sub(1).map(|i| &traj.observations[i]) {
            Some(y) => row.extend(y.iter().map(T::to_string)),
            None => row.extend(std::iter::repeat_n(String::new(), d)),
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| SmcError::io("<trajectory csv>", e))
}

pub fn read_trajectory_csv<T: Real, R: Read>(input: R) -> Result<Trajectory<T>> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr
        .headers()
        .map_err(|e| parse_error(e.to_string()))?
        .clone();
    let n = header.iter().filter(|c| c.starts_with('x')).count();
    let d = header.iter().filter(|c| c.starts_with('y')).count();
    if header.get(0) != Some("k") || header.len() != 1 + n + d {
        return Err(parse_error(format!("unexpected header {header:?}")));
    }
    let parse = |s: &str| {
        s.parse::<T>()
            .map_err(|_| parse_error(format!("bad number {s:?}")))
    };
    let mut traj = Trajectory {
        states: Vec::new(),
        observations: Vec::new(),
    };
    for (row, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| parse_error(e.to_string()))?;
        if record[0] != row.to_string() {
            return Err(parse_error(format!("row {row} has k = {}", &record[0])));
        }
        traj.states
            .push((1..=n).map(|j| parse(&record[j])).collect::<Result<_>>()?);
        if row > 0 {
            traj.observations.push(
                (1 + n..1 + n + d)
                    .map(|j| parse(&record[j]))
                    .collect::<Result<_>>()?,
            );
        }
    }
    Ok(traj)
}
