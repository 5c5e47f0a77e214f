use super::RngStream;
use crate::error::{Result, SmcError};
use crate::scalar::Real;

fn checked_total<T: Real>(weights: &[T]) -> Result<(f64, usize)> {
    let mut total = 0.0;
    let mut last_positive = None;
    for (i, w) in weights.iter().enumerate() {
        let w = w.to_f64_lossy();
        if !(w >= 0.0 && w.is_finite()) {
            return Err(SmcError::InvalidParameter(format!("weight {i} is {w}")));
        }
        if w > 0.0 {
            last_positive = Some(i);
        }
        total += w;
    }
    match last_positive {
        Some(last) if total > 0.0 => Ok((total, last)),
        _ => Err(SmcError::ZeroWeights),
    }
}

/// `n` i.i.d. draws from the categorical law `weights / sum(weights)`,
/// returned in nondecreasing index order.
///
/// Works by inversion against `n` order statistics of the uniform law built
/// from exponential spacings, so the cost is O(n + len) with no sort.
pub fn multinomial_ancestors<T: Real>(
    weights: &[T],
    n: usize,
    rng: &mut RngStream,
) -> Result<Vec<usize>> {
    let (total, last_positive) = checked_total(weights)?;
    let mut spacings = Vec::with_capacity(n);
    let mut acc = 0.0;
    for _ in 0..n {
        acc += rng.exp1();
        spacings.push(acc);
    }
    let norm = acc + rng.exp1();
    let scale = total / norm;

    let mut out = Vec::with_capacity(n);
    let mut j = 0;
    let mut cum = weights[0].to_f64_lossy();
    for s in spacings {
        let u = s * scale;
        while cum <= u && j < last_positive {
            j += 1;
            cum += weights[j].to_f64_lossy();
        }
        out.push(j);
    }
    Ok(out)
}

/// Systematic (stratified-inversion) selection: one uniform offset, `n`
/// evenly spaced positions.
pub fn systematic_ancestors<T: Real>(
    weights: &[T],
    n: usize,
    rng: &mut RngStream,
) -> Result<Vec<usize>> {
    let (total, last_positive) = checked_total(weights)?;
    let offset = rng.uniform();
    let step = total / n as f64;
    let mut out = Vec::with_capacity(n);
    let mut j = 0;
    let mut cum = weights[0].to_f64_lossy();
    for i in 0..n {
        let u = (i as f64 + offset) * step;
        while cum <= u && j < last_positive {
            j += 1;
            cum += weights[j].to_f64_lossy();
        }
        out.push(j);
    }
    Ok(out)
}

/// Multinomial partition of `n` trials over normalized `weights`.
pub fn multinomial_counts<T: Real>(
    weights: &[T],
    n: usize,
    rng: &mut RngStream,
) -> Result<Vec<usize>> {
    let (total, _) = checked_total(weights)?;
    if (total - 1.0).abs() > 1e-9 {
        return Err(SmcError::InvalidParameter(format!(
            "multinomial weights must sum to 1, got {total}"
        )));
    }
    let mut counts = vec![0; weights.len()];
    for a in multinomial_ancestors(weights, n, rng)? {
        counts[a] += 1;
    }
    Ok(counts)
}

/// Uniform index in `0..len`. A single-element set consumes no randomness.
pub fn uniform_index(len: usize, rng: &mut RngStream) -> Result<usize> {
    match len {
        0 => Err(SmcError::EmptySet),
        1 => Ok(0),
        _ => Ok(rng.index_below(len)),
    }
}

/// Uniform draw from a finite, nonempty set.
pub fn uniform_choice<'a, E>(set: &'a [E], rng: &mut RngStream) -> Result<&'a E> {
    Ok(&set[uniform_index(set.len(), rng)?])
}
