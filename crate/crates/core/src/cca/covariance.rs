use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::manifold::linalg::{sym_eigen_sorted, symmetrize};
use crate::Scalar;

/// Sample covariances `(C_X, C_Y, C_XY)` with the 1/N convention.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceTriple<T: Scalar> {
    pub c_x: DMatrix<T>,
    pub c_y: DMatrix<T>,
    pub c_xy: DMatrix<T>,
    pub n: usize,
}

impl<T: Scalar> CovarianceTriple<T> {
    /// Symmetrizes `c_x`, `c_y` and checks shapes and positive semidefiniteness (eigenvalues
    /// down to `-1e-10 · max(1, λ_max)` are accepted as rounding).
    pub fn new(c_x: DMatrix<T>, c_y: DMatrix<T>, c_xy: DMatrix<T>, n: usize) -> Result<Self> {
        if !c_x.is_square() || !c_y.is_square() {
            return Err(Error::Dimension("auto-covariances must be square".into()));
        }
        if c_xy.shape() != (c_x.nrows(), c_y.nrows()) {
            return Err(Error::Dimension(format!(
                "cross-covariance is {:?}, expected {}x{}",
                c_xy.shape(),
                c_x.nrows(),
                c_y.nrows()
            )));
        }
        let c_x = symmetrize(&c_x);
        let c_y = symmetrize(&c_y);
        for (name, c) in [("C_X", &c_x), ("C_Y", &c_y)] {
            let (values, _) = sym_eigen_sorted(c);
            let top = values[0].abs().max(T::one());
            let bottom = values[values.len() - 1];
            if bottom < -T::lit(1e-10) * top {
                return Err(Error::Conditioning(format!(
                    "{name} is indefinite (smallest eigenvalue {bottom})"
                )));
            }
        }
        Ok(Self { c_x, c_y, c_xy, n })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.c_x.nrows(), self.c_y.nrows())
    }
}

/// Subtracts column means in place and returns them.
pub fn center_columns<T: Scalar>(m: &mut DMatrix<T>) -> Vec<T> {
    let n = T::from_usize(m.nrows()).expect("row count fits scalar");
    let mut means = Vec::with_capacity(m.ncols());
    for mut col in m.column_iter_mut() {
        let mean = col.sum() / n;
        col.add_scalar_mut(-mean);
        means.push(mean);
    }
    means
}

/// `(1/N) XᵀX`, `(1/N) YᵀY`, `(1/N) XᵀY`, optionally after mean-centering both views.
pub fn estimate_covariances<T: Scalar>(x: &DMatrix<T>, y: &DMatrix<T>, center: bool) -> Result<CovarianceTriple<T>> {
    if x.nrows() != y.nrows() {
        return Err(Error::RowCountMismatch {
            x_rows: x.nrows(),
            y_rows: y.nrows(),
        });
    }
    let n = x.nrows();
    if n < 2 {
        return Err(Error::InsufficientData(format!("need at least 2 samples, got {n}")));
    }
    let (xc, yc);
    let (xr, yr) = if center {
        let mut xm = x.clone();
        let mut ym = y.clone();
        center_columns(&mut xm);
        center_columns(&mut ym);
        xc = xm;
        yc = ym;
        (&xc, &yc)
    } else {
        (x, y)
    };
    let inv_n = T::one() / T::from_usize(n).expect("row count fits scalar");
    let c_x = xr.tr_mul(xr) * inv_n;
    let c_y = yr.tr_mul(yr) * inv_n;
    let c_xy = xr.tr_mul(yr) * inv_n;
    CovarianceTriple::new(c_x, c_y, c_xy, n)
}
