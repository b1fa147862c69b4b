use nalgebra::DMatrix;
use serde::Serialize;

use crate::cca::{
    approximation_error_diagnostic, pca_reconstruction_bound, whitening_residual, CcaSolution, CovarianceTriple,
};
use crate::error::Result;
use crate::manifold::STIEFEL_BALL_RADIUS;
use crate::rsg::RsgState;
use crate::Scalar;

/// Fixed-field diagnostic record, serialized as JSON with these exact keys.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiagnosticReport {
    #[serde(rename = "E")]
    pub e: f64,
    pub bound_x: f64,
    pub bound_y: f64,
    pub whitening_u: f64,
    pub whitening_v: f64,
    pub max_update_norm: f64,
    pub ball_radius: f64,
}

/// PCA bound for one view: `c` is the covariance of the data projected on the oracle
/// directions (`U*ᵀ C U*`), `c_tilde` the same after first projecting onto span(`Ũ`).
fn view_bound<T: Scalar>(basis: &DMatrix<T>, c: &DMatrix<T>, star: &DMatrix<T>) -> f64 {
    let projector = basis * basis.transpose();
    let exact = star.transpose() * c * star;
    let reduced = star.transpose() * &projector * c * &projector * star;
    pca_reconstruction_bound(&exact, &reduced, star.ncols()).to_f64_lossy()
}

/// Assembles the diagnostic record for `state` against the oracle `exact`, both evaluated
/// on the covariances `cov`. `max_update_norm` is whatever the caller has monitored.
pub fn run_diagnostics<T: Scalar>(
    state: &RsgState<T>,
    cov: &CovarianceTriple<T>,
    exact: &CcaSolution<T>,
    max_update_norm: f64,
) -> Result<DiagnosticReport> {
    let (u, v) = state.extract_solution();
    let approx = approximation_error_diagnostic(cov, &u, &v, exact)?;
    Ok(DiagnosticReport {
        e: approx.e,
        bound_x: view_bound(state.u_tilde.matrix(), &cov.c_x, &exact.u_star),
        bound_y: view_bound(state.v_tilde.matrix(), &cov.c_y, &exact.v_star),
        whitening_u: whitening_residual(&u, &cov.c_x).to_f64_lossy(),
        whitening_v: whitening_residual(&v, &cov.c_y).to_f64_lossy(),
        max_update_norm,
        ball_radius: STIEFEL_BALL_RADIUS,
    })
}
