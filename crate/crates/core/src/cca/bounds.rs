use nalgebra::DMatrix;
use serde::Serialize;

use crate::cca::{CcaSolution, CovarianceTriple};
use crate::error::{Error, Result};
use crate::manifold::linalg::{sym_eigen_sorted, symmetrize};
use crate::Scalar;

/// Eigengaps at or below this only use the `√(2k)‖Δ‖₂` branch.
pub const EIGENGAP_TOLERANCE: f64 = 1e-10;

/// `min(√(2k)‖Δ‖₂, 2‖Δ‖₂² / (λ_k − λ_{k+1}))` with `Δ = c − c_tilde` and `λ` the
/// eigenvalues of `c`.
pub fn pca_reconstruction_bound<T: Scalar>(c: &DMatrix<T>, c_tilde: &DMatrix<T>, k: usize) -> T {
    let delta = symmetrize(&(c - c_tilde));
    let (delta_eigs, _) = sym_eigen_sorted(&delta);
    let spectral = delta_eigs.iter().fold(T::zero(), |acc, &v| acc.max(v.abs()));
    let two_k = T::from_usize(2 * k).expect("usize fits scalar");
    let first = two_k.sqrt() * spectral;

    let (lambda, _) = sym_eigen_sorted(c);
    if k == 0 || k >= lambda.len() {
        return first;
    }
    let gap = lambda[k - 1] - lambda[k];
    if gap <= T::lit(EIGENGAP_TOLERANCE) {
        return first;
    }
    let second = (spectral * spectral + spectral * spectral) / gap;
    first.min(second)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ApproximationError {
    /// `|f_exact − f_tilde|`.
    pub e: f64,
    pub f_exact: f64,
    pub f_tilde: f64,
}

/// Compares `trace(UᵀC_XY V)` of a candidate solution against the oracle's objective.
pub fn approximation_error_diagnostic<T: Scalar>(
    cov: &CovarianceTriple<T>,
    u: &DMatrix<T>,
    v: &DMatrix<T>,
    exact: &CcaSolution<T>,
) -> Result<ApproximationError> {
    if u.shape() != exact.u_star.shape() || v.shape() != exact.v_star.shape() {
        return Err(Error::Dimension(format!(
            "candidate {:?}/{:?} vs oracle {:?}/{:?}",
            u.shape(),
            v.shape(),
            exact.u_star.shape(),
            exact.v_star.shape()
        )));
    }
    let f_exact = (exact.u_star.transpose() * &cov.c_xy * &exact.v_star)
        .trace()
        .to_f64_lossy();
    let f_tilde = (u.transpose() * &cov.c_xy * v).trace().to_f64_lossy();
    Ok(ApproximationError {
        e: (f_exact - f_tilde).abs(),
        f_exact,
        f_tilde,
    })
}
