use nalgebra::{DMatrix, DVector};

use crate::cca::CovarianceTriple;
use crate::error::{Error, Result};
use crate::manifold::linalg::{sym_eigen_sorted, thin_svd};
use crate::Scalar;

/// Absolute floor added to the ridge when clamping small eigenvalues before `λ^{-1/2}`.
pub const EIGEN_FLOOR: f64 = 1e-12;

/// Top-k canonical directions and correlations.
#[derive(Debug, Clone, PartialEq)]
pub struct CcaSolution<T: Scalar> {
    pub u_star: DMatrix<T>,
    pub v_star: DMatrix<T>,
    /// Nonincreasing.
    pub correlations: DVector<T>,
}

impl<T: Scalar> CcaSolution<T> {
    pub fn k(&self) -> usize {
        self.correlations.len()
    }

    pub fn total_correlation(&self) -> T {
        self.correlations.sum()
    }
}

/// `(C + ridge·I)^{-1/2}` with eigenvalues clamped to `ridge + EIGEN_FLOOR`.
fn regularized_inv_sqrt<T: Scalar>(c: &DMatrix<T>, ridge: T, name: &str) -> Result<DMatrix<T>> {
    let (values, vectors) = sym_eigen_sorted(c);
    let top = values[0].abs().max(T::one());
    let floor = ridge + T::lit(EIGEN_FLOOR);
    let mut scaled = vectors.clone();
    for (j, &lambda) in values.iter().enumerate() {
        let shifted = lambda + ridge;
        if shifted < -T::lit(1e-10) * top {
            return Err(Error::Conditioning(format!(
                "{name} + ridge·I is indefinite (eigenvalue {shifted})"
            )));
        }
        let clamped = if shifted > floor { shifted } else { floor };
        scaled.column_mut(j).scale_mut(T::one() / clamped.sqrt());
    }
    Ok(scaled * vectors.transpose())
}

/// Closed-form CCA: whiten both views, take the top-k SVD of
/// `T = C_X^{-1/2} C_XY C_Y^{-1/2}`, map the singular vectors back.
pub fn exact_cca<T: Scalar>(cov: &CovarianceTriple<T>, k: usize, ridge: T) -> Result<CcaSolution<T>> {
    let (dx, dy) = cov.dims();
    if k == 0 || k > dx.min(dy) {
        return Err(Error::Dimension(format!("k = {k} must be in 1..={}", dx.min(dy))));
    }
    if !(ridge >= T::zero()) {
        return Err(Error::Conditioning(format!("ridge {ridge} must be nonnegative")));
    }
    let wx = regularized_inv_sqrt(&cov.c_x, ridge, "C_X")?;
    let wy = regularized_inv_sqrt(&cov.c_y, ridge, "C_Y")?;
    let t = &wx * &cov.c_xy * &wy;
    let svd = thin_svd(&t);
    let phi = svd.u.columns(0, k).into_owned();
    let psi = svd.v_t.rows(0, k).transpose();
    Ok(CcaSolution {
        u_star: wx * phi,
        v_star: wy * psi,
        correlations: svd.singular_values.rows(0, k).into_owned(),
    })
}
