use crate::error::{Result, SmcError};

/// `RMSE_k` over the runs that completed, and how many did not.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RmseAtK {
    pub rmse: f64,
    pub missing: usize,
}

/// `sqrt((1/S) sum_s (1/R_s) sum_r |xhat_{s,r} - x_s|^2)` with the Euclidean
/// norm on the full state. `estimates[s][r]` is `None` for a failed run;
/// failed runs are dropped from the inner mean, and a trajectory with no
/// completed run is dropped from the outer one. `NaN` when nothing completed.
pub fn rmse_at_k(estimates: &[Vec<Option<Vec<f64>>>], truths: &[Vec<f64>]) -> Result<RmseAtK> {
    if estimates.len() != truths.len() {
        return Err(SmcError::Dimension(format!(
            "{} estimate groups for {} truths",
            estimates.len(),
            truths.len()
        )));
    }
    let mut outer = 0.0;
    let mut groups = 0usize;
    let mut missing = 0usize;
    for (runs, truth) in estimates.iter().zip(truths) {
        let mut inner = 0.0;
        let mut done = 0usize;
        for est in runs {
            let Some(est) = est else {
                missing += 1;
                continue;
            };
            if est.len() != truth.len() {
                return Err(SmcError::Dimension(
                    "estimate and truth differ in length".into(),
                ));
            }
            inner += est
                .iter()
                .zip(truth)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>();
            done += 1;
        }
        if done > 0 {
            outer += inner / done as f64;
            groups += 1;
        }
    }
    let rmse = if groups == 0 {
        f64::NAN
    } else {
        (outer / groups as f64).sqrt()
    };
    Ok(RmseAtK { rmse, missing })
}

/// Arithmetic mean of the per-step RMSE values.
pub fn global_rmse(rmse_k: &[f64]) -> Result<f64> {
    if rmse_k.is_empty() {
        return Err(SmcError::EmptySet);
    }
    Ok(rmse_k.iter().sum::<f64>() / rmse_k.len() as f64)
}
