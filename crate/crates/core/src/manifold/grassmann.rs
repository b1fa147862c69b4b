use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::manifold::linalg::{polar_factor, projector_distance, rank_tolerance, thin_svd};
use crate::manifold::{orthonormalize, tol, ManifoldKind, StiefelPoint, TangentVector};
use crate::Scalar;

/// A k-dimensional subspace of ℝᵈ, stored by an orthonormal representative.
#[derive(Debug, Clone)]
pub struct GrassmannPoint<T: Scalar> {
    basis: StiefelPoint<T>,
}

impl<T: Scalar> GrassmannPoint<T> {
    pub fn new(basis: StiefelPoint<T>) -> Self {
        Self { basis }
    }

    /// Span of the columns of an arbitrary full-rank matrix.
    pub fn span_of(m: &DMatrix<T>) -> Result<Self> {
        Ok(Self::new(orthonormalize(m)?))
    }

    pub fn basis(&self) -> &StiefelPoint<T> {
        &self.basis
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        self.basis.matrix()
    }

    /// Projector distance `‖XXᵀ − YYᵀ‖_F`.
    pub fn distance_projector(&self, other: &Self) -> T {
        projector_distance(self.matrix(), other.matrix())
    }

    pub fn same_subspace(&self, other: &Self) -> bool {
        self.matrix().shape() == other.matrix().shape() && self.distance_projector(other) <= T::tol(tol::ORTH, 1e3)
    }
}

impl<T: Scalar> PartialEq for GrassmannPoint<T> {
    fn eq(&self, other: &Self) -> bool {
        self.same_subspace(other)
    }
}

/// `Ȳ (X̄ᵀȲ)⁻¹` minus `X̄`; errors when `X̄ᵀȲ` is numerically singular.
fn tan_form<T: Scalar>(x: &GrassmannPoint<T>, y: &GrassmannPoint<T>) -> Result<DMatrix<T>> {
    let (xm, ym) = (x.matrix(), y.matrix());
    if xm.shape() != ym.shape() {
        return Err(Error::Dimension(format!(
            "gr_log between {:?} and {:?}",
            xm.shape(),
            ym.shape()
        )));
    }
    let overlap = xm.transpose() * ym;
    let sv = crate::manifold::linalg::singular_values(&overlap);
    let smallest = sv[sv.len() - 1];
    // Overlap singular values are cosines of principal angles and never exceed one, so the
    // relative rank threshold is taken against 1.
    if !(smallest > rank_tolerance(T::one())) {
        return Err(Error::OrthogonalSubspace {
            smallest: smallest.to_f64_lossy(),
        });
    }
    let inv = overlap
        .lu()
        .try_inverse()
        .ok_or(Error::OrthogonalSubspace { smallest: 0.0 })?;
    Ok(ym * inv - xm)
}

/// Tangent-form inverse exponential `Ȳ(X̄ᵀȲ)⁻¹ − X̄`.
///
/// The result is horizontal (`X̄ᵀH = 0`) and its singular values are the tangents of the
/// principal angles between the subspaces.
pub fn gr_log<T: Scalar>(x: &GrassmannPoint<T>, y: &GrassmannPoint<T>) -> Result<TangentVector<T>> {
    let h = tan_form(x, y)?;
    TangentVector::new(ManifoldKind::Grassmann, x.matrix().clone(), h)
}

/// Geodesic inverse exponential: the same horizontal direction as [`gr_log`] but with
/// singular values `θᵢ` (principal angles) in place of `tan θᵢ`, so its norm never
/// exceeds `√k · π/2`.
pub fn gr_log_geodesic<T: Scalar>(x: &GrassmannPoint<T>, y: &GrassmannPoint<T>) -> Result<TangentVector<T>> {
    let h = tan_form(x, y)?;
    let svd = thin_svd(&h);
    let mut u = svd.u;
    for (j, s) in svd.singular_values.iter().enumerate() {
        let theta = s.atan();
        u.column_mut(j).scale_mut(theta);
    }
    TangentVector::new(ManifoldKind::Grassmann, x.matrix().clone(), u * svd.v_t)
}

/// Subspace spanned by the SVD retraction of `X̄ + V`.
pub fn gr_exp<T: Scalar>(x: &GrassmannPoint<T>, v: &TangentVector<T>) -> Result<GrassmannPoint<T>> {
    if !matches!(v.kind(), ManifoldKind::Grassmann | ManifoldKind::Stiefel) {
        return Err(Error::InvalidTangent(format!(
            "{:?} tangent passed to gr_exp",
            v.kind()
        )));
    }
    if !v.is_based_at(x.matrix()) {
        return Err(Error::StaleGradient);
    }
    let moved = x.matrix() + v.ambient();
    Ok(GrassmannPoint::new(StiefelPoint::new_unchecked(polar_factor(&moved)?)))
}
