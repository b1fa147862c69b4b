use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::manifold::linalg::{orthonormality_residual, skew, sym_eigen_sorted};
use crate::manifold::{matrix_exp_small, matrix_log_small, tol, ManifoldKind, TangentVector};
use crate::Scalar;

/// A k×k rotation matrix: `RᵀR = I`, `det R = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SoPoint<T: Scalar> {
    matrix: DMatrix<T>,
}

impl<T: Scalar> SoPoint<T> {
    pub fn new(matrix: DMatrix<T>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Dimension(format!(
                "SO(k) point must be square, got {:?}",
                matrix.shape()
            )));
        }
        let residual = orthonormality_residual(&matrix);
        if !(residual <= T::tol(tol::ORTH, 1e3)) {
            return Err(Error::Infeasible(format!(
                "not orthogonal: ‖RᵀR − I‖_F = {:e}",
                residual.to_f64_lossy()
            )));
        }
        let det = matrix.determinant();
        if !((det - T::one()).abs() <= T::tol(tol::DET, 1e3)) {
            return Err(Error::Infeasible(format!("determinant {det} is not 1")));
        }
        Ok(Self { matrix })
    }

    pub(crate) fn new_unchecked(matrix: DMatrix<T>) -> Self {
        Self { matrix }
    }

    pub fn identity(k: usize) -> Self {
        Self {
            matrix: DMatrix::identity(k, k),
        }
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<T> {
        self.matrix
    }

    pub fn order(&self) -> usize {
        self.matrix.nrows()
    }

    /// Left-translates a Lie-algebra element `Ω` to the tangent `R Ω` at this point.
    pub fn translate(&self, algebra: &DMatrix<T>) -> Result<TangentVector<T>> {
        TangentVector::new(
            ManifoldKind::SpecialOrthogonal,
            self.matrix.clone(),
            &self.matrix * algebra,
        )
    }

    pub fn orthogonality_residual(&self) -> T {
        orthonormality_residual(&self.matrix)
    }

    pub fn determinant(&self) -> T {
        self.matrix.determinant()
    }
}

/// `G − Gᵀ`, an element of the Lie algebra so(k) (a tangent at the identity).
pub fn so_project_tangent<T: Scalar>(g: &DMatrix<T>) -> Result<TangentVector<T>> {
    if !g.is_square() {
        return Err(Error::Dimension(format!(
            "so(k) projection needs a square matrix, got {:?}",
            g.shape()
        )));
    }
    let k = g.nrows();
    TangentVector::new(
        ManifoldKind::SpecialOrthogonal,
        DMatrix::identity(k, k),
        g - g.transpose(),
    )
}

/// `R expm(RᵀV)`.
pub fn so_exp<T: Scalar>(r: &SoPoint<T>, v: &TangentVector<T>) -> Result<SoPoint<T>> {
    if v.kind() != ManifoldKind::SpecialOrthogonal {
        return Err(Error::InvalidTangent(format!(
            "{:?} tangent passed to so_exp",
            v.kind()
        )));
    }
    if !v.is_based_at(&r.matrix) {
        return Err(Error::StaleGradient);
    }
    let omega = r.matrix.transpose() * v.ambient();
    let asym = (&omega + omega.transpose()).norm();
    let scale = T::one().max(omega.norm());
    if !(asym <= T::tol(tol::TAN, 1e3) * scale) {
        return Err(Error::InvalidTangent(format!(
            "RᵀV is not antisymmetric (‖Ω + Ωᵀ‖_F = {:e})",
            asym.to_f64_lossy()
        )));
    }
    let rotation = matrix_exp_small(&skew(&omega))?;
    Ok(SoPoint::new_unchecked(&r.matrix * rotation))
}

/// `R logm(RᵀP)` with the principal logarithm; the output's antisymmetry is enforced.
pub fn so_log<T: Scalar>(r: &SoPoint<T>, p: &SoPoint<T>) -> Result<TangentVector<T>> {
    if r.order() != p.order() {
        return Err(Error::Dimension(format!(
            "so_log between SO({}) and SO({})",
            r.order(),
            p.order()
        )));
    }
    let rel = r.matrix.transpose() * &p.matrix;
    // Eigenvalues of sym(RᵀP) are the cosines of the rotation angles.
    let (cosines, _) = sym_eigen_sorted(&rel);
    if let Some(&smallest) = cosines.as_slice().last() {
        let limit = -(T::lit(tol::ANGLE).cos());
        if smallest <= limit {
            return Err(Error::LogBranch(format!("rotation angle within {} of π", tol::ANGLE)));
        }
    }
    let log = skew(&matrix_log_small(&rel)?);
    TangentVector::new(ManifoldKind::SpecialOrthogonal, r.matrix.clone(), &r.matrix * log)
}
