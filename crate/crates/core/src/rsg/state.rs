use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::cca::CovarianceTriple;
use crate::error::{Error, Result};
use crate::manifold::linalg::qr_positive;
use crate::manifold::{orthonormalize, tol, upper_project, SoPoint, StiefelPoint, UpperTriangular};
use crate::Scalar;

/// Factored canonical directions `U = Ũ S_u Q_u`, `V = Ṽ S_v Q_v`, plus the number of
/// batches consumed.
#[derive(Debug, Clone, PartialEq)]
pub struct RsgState<T: Scalar> {
    pub u_tilde: StiefelPoint<T>,
    pub v_tilde: StiefelPoint<T>,
    pub s_u: UpperTriangular<T>,
    pub s_v: UpperTriangular<T>,
    pub q_u: SoPoint<T>,
    pub q_v: SoPoint<T>,
    pub j: u64,
}

/// Seeded random orthonormal `Ũ`, `Ṽ` (Ũ drawn first); identity `S` and `Q`.
pub fn init_state<T: Scalar>(d_x: usize, d_y: usize, k: usize, seed: u64) -> Result<RsgState<T>> {
    if k == 0 || k > d_x.min(d_y) {
        return Err(Error::Dimension(format!("k = {k} must be in 1..={}", d_x.min(d_y))));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gaussian = |rows: usize| {
        DMatrix::from_fn(rows, k, |_, _| {
            let v: f64 = StandardNormal.sample(&mut rng);
            T::lit(v)
        })
    };
    let gu = gaussian(d_x);
    let gv = gaussian(d_y);
    RsgState::with_bases(orthonormalize(&gu)?, orthonormalize(&gv)?)
}

/// Raw factor matrices, used where the manifold structure must be bypassed (finite
/// differences, serialization).
#[derive(Debug, Clone, PartialEq)]
pub struct RawFactors<T: Scalar> {
    pub u_tilde: DMatrix<T>,
    pub v_tilde: DMatrix<T>,
    pub s_u: DMatrix<T>,
    pub s_v: DMatrix<T>,
    pub q_u: DMatrix<T>,
    pub q_v: DMatrix<T>,
}

impl<T: Scalar> RawFactors<T> {
    /// `trace((Ũ S_u Q_u)ᵀ C (Ṽ S_v Q_v))` for arbitrary (not necessarily feasible) factors.
    pub fn f_tilde(&self, c_xy: &DMatrix<T>) -> T {
        let u = &self.u_tilde * &self.s_u * &self.q_u;
        let v = &self.v_tilde * &self.s_v * &self.q_v;
        (u.transpose() * c_xy * v).trace()
    }

    pub fn as_array(&self) -> [&DMatrix<T>; 6] {
        [&self.u_tilde, &self.v_tilde, &self.s_u, &self.s_v, &self.q_u, &self.q_v]
    }

    pub fn as_array_mut(&mut self) -> [&mut DMatrix<T>; 6] {
        [
            &mut self.u_tilde,
            &mut self.v_tilde,
            &mut self.s_u,
            &mut self.s_v,
            &mut self.q_u,
            &mut self.q_v,
        ]
    }

    pub fn negated(&self) -> Self {
        Self {
            u_tilde: -&self.u_tilde,
            v_tilde: -&self.v_tilde,
            s_u: -&self.s_u,
            s_v: -&self.s_v,
            q_u: -&self.q_u,
            q_v: -&self.q_v,
        }
    }
}

/// The three traces of the factored objective at a state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Objective {
    /// `trace(Uᵀ C_XY V)`.
    pub f_tilde: f64,
    /// `trace(ŨᵀC_XŨ) + trace(ṼᵀC_YṼ)`.
    pub f_pca: f64,
    pub f_tot: f64,
}

/// Constraint residuals of all six factors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Feasibility {
    pub stiefel_u: f64,
    pub stiefel_v: f64,
    pub so_u: f64,
    pub so_v: f64,
    pub det_u: f64,
    pub det_v: f64,
    /// Largest absolute strictly-lower entry of `S_u`, `S_v`.
    pub lower: f64,
}

impl Feasibility {
    pub fn check(&self) -> Result<()> {
        let orth = [self.stiefel_u, self.stiefel_v, self.so_u, self.so_v]
            .into_iter()
            .fold(0.0, f64::max);
        let det = self.det_u.max(self.det_v);
        if !(orth <= tol::ORTH) || !(det <= tol::DET) || self.lower != 0.0 {
            return Err(Error::Infeasible(format!("{self:?}")));
        }
        Ok(())
    }
}

impl<T: Scalar> RsgState<T> {
    /// Warm start from given bases (e.g. top-k PCA eigenvectors); `S`, `Q` start at identity.
    pub fn with_bases(u_tilde: StiefelPoint<T>, v_tilde: StiefelPoint<T>) -> Result<Self> {
        let k = u_tilde.rank();
        if v_tilde.rank() != k {
            return Err(Error::Dimension(format!("bases have ranks {k} and {}", v_tilde.rank())));
        }
        Ok(Self {
            u_tilde,
            v_tilde,
            s_u: UpperTriangular::identity(k),
            s_v: UpperTriangular::identity(k),
            q_u: SoPoint::identity(k),
            q_v: SoPoint::identity(k),
            j: 0,
        })
    }

    /// Factors given directions as `U = Ũ R` with `Ũ R` the QR factorization (`diag R ≥ 0`),
    /// so `S_u = R = ŨᵀU` and `Q_u = I`; likewise for `V`.
    pub fn from_directions(u: &DMatrix<T>, v: &DMatrix<T>) -> Result<Self> {
        let (qu, ru) = qr_positive(u)?;
        let (qv, rv) = qr_positive(v)?;
        let mut state = Self::with_bases(StiefelPoint::new(qu)?, StiefelPoint::new(qv)?)?;
        state.s_u = upper_project(&ru);
        state.s_v = upper_project(&rv);
        Ok(state)
    }

    /// Reassembles a state from raw matrices, validating every constraint.
    pub fn from_raw(raw: RawFactors<T>, j: u64) -> Result<Self> {
        let state = Self {
            u_tilde: StiefelPoint::new(raw.u_tilde)?,
            v_tilde: StiefelPoint::new(raw.v_tilde)?,
            s_u: UpperTriangular::new(raw.s_u)?,
            s_v: UpperTriangular::new(raw.s_v)?,
            q_u: SoPoint::new(raw.q_u)?,
            q_v: SoPoint::new(raw.q_v)?,
            j,
        };
        let k = state.k();
        let shapes_ok = state.v_tilde.rank() == k
            && [
                state.s_u.order(),
                state.s_v.order(),
                state.q_u.order(),
                state.q_v.order(),
            ]
            .iter()
            .all(|&o| o == k);
        if !shapes_ok {
            return Err(Error::Dimension("factor shapes disagree on k".into()));
        }
        Ok(state)
    }

    pub fn raw(&self) -> RawFactors<T> {
        RawFactors {
            u_tilde: self.u_tilde.matrix().clone(),
            v_tilde: self.v_tilde.matrix().clone(),
            s_u: self.s_u.matrix().clone(),
            s_v: self.s_v.matrix().clone(),
            q_u: self.q_u.matrix().clone(),
            q_v: self.q_v.matrix().clone(),
        }
    }

    pub fn k(&self) -> usize {
        self.u_tilde.rank()
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.u_tilde.dim(), self.v_tilde.dim())
    }

    /// `(Ũ S_u Q_u, Ṽ S_v Q_v)`.
    pub fn extract_solution(&self) -> (DMatrix<T>, DMatrix<T>) {
        let u = self.u_tilde.matrix() * self.s_u.matrix() * self.q_u.matrix();
        let v = self.v_tilde.matrix() * self.s_v.matrix() * self.q_v.matrix();
        (u, v)
    }

    pub fn objective(&self, cov: &CovarianceTriple<T>) -> Result<Objective> {
        let (dx, dy) = self.dims();
        if cov.dims() != (dx, dy) {
            return Err(Error::Dimension(format!(
                "covariance is for {:?}, state for {:?}",
                cov.dims(),
                (dx, dy)
            )));
        }
        let (u, v) = self.extract_solution();
        let f_tilde = (u.transpose() * &cov.c_xy * v).trace().to_f64_lossy();
        let ut = self.u_tilde.matrix();
        let vt = self.v_tilde.matrix();
        let f_pca =
            ((ut.transpose() * &cov.c_x * ut).trace() + (vt.transpose() * &cov.c_y * vt).trace()).to_f64_lossy();
        Ok(Objective {
            f_tilde,
            f_pca,
            f_tot: f_tilde + f_pca,
        })
    }

    pub fn feasibility(&self) -> Feasibility {
        let lower = |s: &UpperTriangular<T>| {
            let m = s.matrix();
            let mut worst = 0.0f64;
            for c in 0..m.ncols() {
                for r in (c + 1)..m.nrows() {
                    worst = worst.max(m[(r, c)].abs().to_f64_lossy());
                }
            }
            worst
        };
        Feasibility {
            stiefel_u: self.u_tilde.orthonormality_residual().to_f64_lossy(),
            stiefel_v: self.v_tilde.orthonormality_residual().to_f64_lossy(),
            so_u: self.q_u.orthogonality_residual().to_f64_lossy(),
            so_v: self.q_v.orthogonality_residual().to_f64_lossy(),
            det_u: (self.q_u.determinant() - T::one()).abs().to_f64_lossy(),
            det_v: (self.q_v.determinant() - T::one()).abs().to_f64_lossy(),
            lower: lower(&self.s_u).max(lower(&self.s_v)),
        }
    }
}
