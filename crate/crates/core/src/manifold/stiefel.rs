use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::manifold::linalg::{orthonormality_residual, polar_factor, qr_positive, symmetrize};
use crate::manifold::{tol, ManifoldKind, TangentVector};
use crate::Scalar;

/// A d×k matrix with orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct StiefelPoint<T: Scalar> {
    matrix: DMatrix<T>,
}

/// Which tangent projection to apply to Euclidean gradients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StiefelProjection {
    /// `G − X Gᵀ X`. Not idempotent: reapplying it adds `X(XᵀG − GᵀX)`.
    #[default]
    Paper,
    /// The orthogonal projection `G − X sym(XᵀG)`.
    Canonical,
}

impl StiefelProjection {
    pub fn apply<T: Scalar>(self, x: &StiefelPoint<T>, g: &DMatrix<T>) -> Result<TangentVector<T>> {
        check_shape(x, g)?;
        let xm = &x.matrix;
        let ambient = match self {
            StiefelProjection::Paper => g - xm * g.transpose() * xm,
            StiefelProjection::Canonical => g - xm * symmetrize(&(xm.transpose() * g)),
        };
        TangentVector::new(ManifoldKind::Stiefel, xm.clone(), ambient)
    }
}

impl std::str::FromStr for StiefelProjection {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "paper" => Ok(Self::Paper),
            "canonical" => Ok(Self::Canonical),
            other => Err(format!("unknown projection `{other}` (expected paper|canonical)")),
        }
    }
}

fn check_shape<T: Scalar>(x: &StiefelPoint<T>, g: &DMatrix<T>) -> Result<()> {
    if x.matrix.shape() != g.shape() {
        return Err(Error::Dimension(format!(
            "expected a {:?} matrix, got {:?}",
            x.matrix.shape(),
            g.shape()
        )));
    }
    Ok(())
}

impl<T: Scalar> StiefelPoint<T> {
    pub fn new(matrix: DMatrix<T>) -> Result<Self> {
        let (d, k) = matrix.shape();
        if k == 0 || k > d {
            return Err(Error::Dimension(format!("Stiefel point needs 0 < k <= d, got {d}x{k}")));
        }
        let residual = orthonormality_residual(&matrix);
        if !(residual <= T::tol(tol::ORTH, 1e3)) {
            return Err(Error::Infeasible(format!(
                "columns not orthonormal: ‖XᵀX − I‖_F = {:e}",
                residual.to_f64_lossy()
            )));
        }
        Ok(Self { matrix })
    }

    pub(crate) fn new_unchecked(matrix: DMatrix<T>) -> Self {
        Self { matrix }
    }

    /// First k columns of the d×d identity.
    pub fn identity(d: usize, k: usize) -> Result<Self> {
        Self::new(DMatrix::identity(d, k))
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<T> {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn rank(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn orthonormality_residual(&self) -> T {
        orthonormality_residual(&self.matrix)
    }
}

/// Tangent projection `G − X Gᵀ X` (the `Paper` variant).
pub fn st_project_tangent<T: Scalar>(x: &StiefelPoint<T>, g: &DMatrix<T>) -> Result<TangentVector<T>> {
    StiefelProjection::Paper.apply(x, g)
}

/// SVD retraction: `Ũ Ṽᵀ` where `Ũ Σ Ṽᵀ` is the thin SVD of `X + V`.
pub fn st_exp<T: Scalar>(x: &StiefelPoint<T>, v: &TangentVector<T>) -> Result<StiefelPoint<T>> {
    if !matches!(v.kind(), ManifoldKind::Stiefel | ManifoldKind::Grassmann) {
        return Err(Error::InvalidTangent(format!(
            "{:?} tangent passed to st_exp",
            v.kind()
        )));
    }
    if !v.is_based_at(&x.matrix) {
        return Err(Error::StaleGradient);
    }
    let moved = &x.matrix + v.ambient();
    Ok(StiefelPoint::new_unchecked(polar_factor(&moved)?))
}

/// `(Y − X) − X (Y − X)ᵀ X`.
pub fn st_log<T: Scalar>(x: &StiefelPoint<T>, y: &StiefelPoint<T>) -> Result<TangentVector<T>> {
    st_log_with(x, y, StiefelProjection::Paper)
}

/// Inverse exponential as the chosen tangent projection of `Y − X`. With
/// [`StiefelProjection::Paper`] this is the closed form of [`st_log`].
pub fn st_log_with<T: Scalar>(
    x: &StiefelPoint<T>,
    y: &StiefelPoint<T>,
    projection: StiefelProjection,
) -> Result<TangentVector<T>> {
    if x.matrix.shape() != y.matrix.shape() {
        return Err(Error::Dimension(format!(
            "st_log between {:?} and {:?}",
            x.matrix.shape(),
            y.matrix.shape()
        )));
    }
    let diff = &y.matrix - &x.matrix;
    let angle = crate::manifold::linalg::principal_angles(&x.matrix, &y.matrix)
        .last()
        .copied()
        .unwrap_or_else(T::zero);
    if angle.to_f64_lossy() >= crate::manifold::STIEFEL_BALL_RADIUS {
        log::debug!("st_log: target outside injectivity ball (largest principal angle {angle})");
    }
    projection.apply(x, &diff)
}

/// Orthonormal basis of the column span of `m` via QR with nonnegative `diag(R)`.
pub fn orthonormalize<T: Scalar>(m: &DMatrix<T>) -> Result<StiefelPoint<T>> {
    let (q, _) = qr_positive(m)?;
    Ok(StiefelPoint::new_unchecked(q))
}
