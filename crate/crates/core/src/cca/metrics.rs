use nalgebra::DMatrix;

use crate::cca::{estimate_covariances, exact_cca, CcaSolution};
use crate::error::{Error, Result};
use crate::Scalar;

/// Total canonical correlation: sum of all `k` canonical correlations between the
/// (centered) columns of `a` and `b`.
pub fn tcc<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>) -> Result<T> {
    if a.nrows() != b.nrows() {
        return Err(Error::RowCountMismatch {
            x_rows: a.nrows(),
            y_rows: b.nrows(),
        });
    }
    let k = a.ncols().min(b.ncols());
    if k > a.nrows() {
        return Err(Error::InsufficientData(format!(
            "k = {k} exceeds sample count {}",
            a.nrows()
        )));
    }
    let cov = estimate_covariances(a, b, true)?;
    Ok(exact_cca(&cov, k, T::zero())?.total_correlation())
}

/// `TCC(XÛ, YV̂) / TCC(XU*, YV*)`, unclamped.
pub fn pcc<T: Scalar>(
    x: &DMatrix<T>,
    y: &DMatrix<T>,
    u_hat: &DMatrix<T>,
    v_hat: &DMatrix<T>,
    exact: &CcaSolution<T>,
) -> Result<T> {
    PccEvaluator::new(x.clone(), y.clone(), exact)?.score(u_hat, v_hat)
}

/// PCC against a fixed data set, with the oracle denominator computed once.
#[derive(Debug, Clone)]
pub struct PccEvaluator<T: Scalar> {
    x: DMatrix<T>,
    y: DMatrix<T>,
    denominator: T,
}

impl<T: Scalar> PccEvaluator<T> {
    pub fn new(x: DMatrix<T>, y: DMatrix<T>, exact: &CcaSolution<T>) -> Result<Self> {
        check_shapes(&x, &y, &exact.u_star, &exact.v_star)?;
        let denominator = tcc(&(&x * &exact.u_star), &(&y * &exact.v_star))?;
        if !(denominator.abs() > T::default_epsilon()) {
            return Err(Error::DegenerateOracle);
        }
        Ok(Self { x, y, denominator })
    }

    pub fn denominator(&self) -> T {
        self.denominator
    }

    pub fn score(&self, u_hat: &DMatrix<T>, v_hat: &DMatrix<T>) -> Result<T> {
        check_shapes(&self.x, &self.y, u_hat, v_hat)?;
        Ok(tcc(&(&self.x * u_hat), &(&self.y * v_hat))? / self.denominator)
    }
}

fn check_shapes<T: Scalar>(x: &DMatrix<T>, y: &DMatrix<T>, u: &DMatrix<T>, v: &DMatrix<T>) -> Result<()> {
    if x.nrows() != y.nrows() {
        return Err(Error::RowCountMismatch {
            x_rows: x.nrows(),
            y_rows: y.nrows(),
        });
    }
    if u.nrows() != x.ncols() || v.nrows() != y.ncols() || u.ncols() != v.ncols() {
        return Err(Error::Dimension(format!(
            "directions {:?}/{:?} do not fit views with {}/{} columns",
            u.shape(),
            v.shape(),
            x.ncols(),
            y.ncols()
        )));
    }
    Ok(())
}

/// `‖UᵀCU − I‖_F`.
pub fn whitening_residual<T: Scalar>(u: &DMatrix<T>, c: &DMatrix<T>) -> T {
    let k = u.ncols();
    (u.transpose() * c * u - DMatrix::identity(k, k)).norm()
}
