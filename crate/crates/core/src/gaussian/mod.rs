//! Kalman, extended Kalman and unscented Kalman filters.

mod kalman;
mod unscented;

pub use kalman::{ekf_step, kalman_step, run_ekf, GaussianBelief};
pub use unscented::{run_ukf, sigma_points, ukf_step, SigmaPoints, UtForm, UtParams};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::scalar::Real;

/// Symmetrizes `cov` and clamps negative eigenvalues to zero.
pub(crate) fn stabilize_cov<T: Real>(cov: &DMatrix<T>) -> DMatrix<T> {
    let sym = (cov + cov.transpose()) * T::lit(0.5);
    if nalgebra::Cholesky::new(sym.clone()).is_some() {
        return sym;
    }
    let eig = SymmetricEigen::new(sym.clone());
    if eig.eigenvalues.iter().all(|l| *l >= T::zero()) {
        return sym;
    }
    let clamped = eig
        .eigenvalues
        .map(|l| if l < T::zero() { T::zero() } else { l });
    let rebuilt =
        &eig.eigenvectors * DMatrix::from_diagonal(&clamped) * eig.eigenvectors.transpose();
    (&rebuilt + rebuilt.transpose()) * T::lit(0.5)
}
