//! Points, tangent vectors and exponential / inverse-exponential maps for the
//! Stiefel manifold St(k, d), the Grassmannian Gr(k, d), SO(k) and the linear
//! space of upper-triangular k×k matrices.
//!
//! Every point type validates its defining constraint on construction, so any
//! value of these types is feasible up to the tolerances in [`tol`].

pub mod expm;
pub mod grassmann;
pub mod linalg;
pub mod so;
pub mod stiefel;
pub mod upper;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::Scalar;

pub use expm::{matrix_exp_small, matrix_log_small};
pub use grassmann::{gr_exp, gr_log, gr_log_geodesic, GrassmannPoint};
pub use linalg::principal_angles;
pub use so::{so_exp, so_log, so_project_tangent, SoPoint};
pub use stiefel::{orthonormalize, st_exp, st_log, st_log_with, st_project_tangent, StiefelPoint, StiefelProjection};
pub use upper::{upper_project, UpperTriangular};

/// Feasibility tolerances (for `f64`; `f32` floors them at a multiple of machine epsilon).
pub mod tol {
    /// `‖XᵀX − I‖_F` for Stiefel and SO points.
    pub const ORTH: f64 = 1e-8;
    /// Tangent-space membership residual.
    pub const TAN: f64 = 1e-8;
    /// `|det R − 1|` for SO points.
    pub const DET: f64 = 1e-8;
    /// Relative rank threshold: singular values below `RANK_REL · σ_max` count as zero.
    pub const RANK_REL: f64 = 1e-12;
    /// Closest allowed approach of a rotation angle to π in `so_log`.
    pub const ANGLE: f64 = 1e-6;
}

/// Injectivity radius used to monitor update norms on St and Gr: π/(2√2).
pub const STIEFEL_BALL_RADIUS: f64 = std::f64::consts::PI / (2.0 * std::f64::consts::SQRT_2);
/// Injectivity radius of SO(k): π/2.
pub const SO_BALL_RADIUS: f64 = std::f64::consts::FRAC_PI_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum ManifoldKind {
    Stiefel,
    Grassmann,
    SpecialOrthogonal,
    UpperTriangular,
}

/// A tangent vector in its ambient-matrix representation, tagged with the point it is
/// based at and the manifold it belongs to.
///
/// For `SpecialOrthogonal` the ambient matrix is `R Ω` with `Ω` antisymmetric, so that
/// `Exp_R(U) = R expm(RᵀU)` consumes it directly.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector<T: Scalar> {
    ambient: DMatrix<T>,
    base: DMatrix<T>,
    kind: ManifoldKind,
}

impl<T: Scalar> TangentVector<T> {
    pub fn new(kind: ManifoldKind, base: DMatrix<T>, ambient: DMatrix<T>) -> Result<Self> {
        if base.shape() != ambient.shape() {
            return Err(Error::Dimension(format!(
                "tangent {:?} does not match base point {:?}",
                ambient.shape(),
                base.shape()
            )));
        }
        Ok(Self { ambient, base, kind })
    }

    pub fn zeros_at(kind: ManifoldKind, base: &DMatrix<T>) -> Self {
        let (r, c) = base.shape();
        Self {
            ambient: DMatrix::zeros(r, c),
            base: base.clone(),
            kind,
        }
    }

    pub fn ambient(&self) -> &DMatrix<T> {
        &self.ambient
    }

    pub fn into_ambient(self) -> DMatrix<T> {
        self.ambient
    }

    pub fn base(&self) -> &DMatrix<T> {
        &self.base
    }

    pub fn kind(&self) -> ManifoldKind {
        self.kind
    }

    pub fn is_based_at(&self, point: &DMatrix<T>) -> bool {
        self.base == *point
    }

    pub fn norm(&self) -> T {
        self.ambient.norm()
    }

    pub fn scaled(&self, factor: T) -> Self {
        Self {
            ambient: &self.ambient * factor,
            base: self.base.clone(),
            kind: self.kind,
        }
    }

    pub fn negated(&self) -> Self {
        self.scaled(-T::one())
    }

    /// Sum of two tangents at the same point on the same manifold. Grassmann tangents are
    /// horizontal Stiefel tangents at the same basis, so the two kinds may be mixed; the
    /// result keeps `self`'s kind.
    pub fn try_add(&self, other: &Self) -> Result<Self> {
        let compatible = self.kind == other.kind
            || matches!(
                (self.kind, other.kind),
                (ManifoldKind::Stiefel, ManifoldKind::Grassmann) | (ManifoldKind::Grassmann, ManifoldKind::Stiefel)
            );
        if !compatible || self.base != other.base {
            return Err(Error::StaleGradient);
        }
        Ok(Self {
            ambient: &self.ambient + &other.ambient,
            base: self.base.clone(),
            kind: self.kind,
        })
    }

    /// Metric `trace(UᵀV)`. The SO table metric `trace(XᵀUXᵀV)` coincides with this for
    /// the left-translated representation; it is only used for diagnostics.
    pub fn inner(&self, other: &Self) -> T {
        self.ambient.dot(&other.ambient)
    }

    /// Residual of the tangent-space condition for this vector's manifold.
    pub fn tangent_residual(&self) -> T {
        match self.kind {
            ManifoldKind::Stiefel => {
                let xtv = self.base.transpose() * &self.ambient;
                (&xtv + xtv.transpose()).norm()
            }
            ManifoldKind::Grassmann => (self.base.transpose() * &self.ambient).norm(),
            ManifoldKind::SpecialOrthogonal => {
                let omega = self.base.transpose() * &self.ambient;
                (&omega + omega.transpose()).norm()
            }
            ManifoldKind::UpperTriangular => {
                let n = self.ambient.nrows().min(self.ambient.ncols());
                let mut s = T::zero();
                for j in 0..n {
                    for i in (j + 1)..self.ambient.nrows() {
                        s += self.ambient[(i, j)] * self.ambient[(i, j)];
                    }
                }
                s.sqrt()
            }
        }
    }
}
