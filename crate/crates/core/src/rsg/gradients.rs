use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::manifold::{
    gr_log, gr_log_geodesic, orthonormalize, so_project_tangent, upper_project, GrassmannPoint, ManifoldKind,
    StiefelPoint, StiefelProjection, TangentVector,
};
use crate::rsg::{PcaLog, RawFactors, RsgState};
use crate::Scalar;

/// One tangent per factor, each based at the corresponding factor of the state it was
/// computed from.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientBundle<T: Scalar> {
    pub u_tilde: TangentVector<T>,
    pub v_tilde: TangentVector<T>,
    pub s_u: TangentVector<T>,
    pub s_v: TangentVector<T>,
    pub q_u: TangentVector<T>,
    pub q_v: TangentVector<T>,
}

impl<T: Scalar> GradientBundle<T> {
    pub fn zeros(state: &RsgState<T>) -> Self {
        Self {
            u_tilde: TangentVector::zeros_at(ManifoldKind::Stiefel, state.u_tilde.matrix()),
            v_tilde: TangentVector::zeros_at(ManifoldKind::Stiefel, state.v_tilde.matrix()),
            s_u: TangentVector::zeros_at(ManifoldKind::UpperTriangular, state.s_u.matrix()),
            s_v: TangentVector::zeros_at(ManifoldKind::UpperTriangular, state.s_v.matrix()),
            q_u: TangentVector::zeros_at(ManifoldKind::SpecialOrthogonal, state.q_u.matrix()),
            q_v: TangentVector::zeros_at(ManifoldKind::SpecialOrthogonal, state.q_v.matrix()),
        }
    }

    pub fn as_array(&self) -> [&TangentVector<T>; 6] {
        [&self.u_tilde, &self.v_tilde, &self.s_u, &self.s_v, &self.q_u, &self.q_v]
    }
}

/// Grassmann-average gradient of the PCA term for both views, plus the number of batch
/// blocks that were skipped as degenerate.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaGradient<T: Scalar> {
    pub u_tilde: TangentVector<T>,
    pub v_tilde: TangentVector<T>,
    pub skipped_blocks: usize,
}

/// `−Σ_l Log_{[Ũ]}(Ẑ_l)` where `Ẑ_l` spans the l-th block of `k` consecutive rows.
fn view_pca_gradient<T: Scalar>(
    base: &StiefelPoint<T>,
    batch: &DMatrix<T>,
    log: PcaLog,
) -> Result<(TangentVector<T>, usize)> {
    let k = base.rank();
    if batch.ncols() != base.dim() {
        return Err(Error::Dimension(format!(
            "batch has {} columns, basis lives in dimension {}",
            batch.ncols(),
            base.dim()
        )));
    }
    if batch.nrows() < k {
        return Err(Error::Dimension(format!(
            "batch of {} rows cannot form a {k}-row block",
            batch.nrows()
        )));
    }
    let here = GrassmannPoint::new(base.clone());
    let mut sum = DMatrix::zeros(base.dim(), k);
    let mut skipped = 0;
    for l in 0..batch.nrows() / k {
        let block = batch.rows(l * k, k).transpose();
        let target = match orthonormalize(&block) {
            Ok(z) => GrassmannPoint::new(z),
            Err(Error::DegenerateBlock { .. }) => {
                skipped += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let h = match log {
            PcaLog::Geodesic => gr_log_geodesic(&here, &target),
            PcaLog::Table => gr_log(&here, &target),
        };
        match h {
            Ok(h) => sum += h.ambient(),
            Err(Error::OrthogonalSubspace { .. }) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    if skipped > 0 {
        log::debug!("pca gradient: skipped {skipped} degenerate block(s)");
    }
    Ok((
        TangentVector::new(ManifoldKind::Grassmann, base.matrix().clone(), -sum)?,
        skipped,
    ))
}

/// Red-block gradient for both views. Rows beyond `⌊B/k⌋·k` are ignored.
pub fn pca_gradient<T: Scalar>(
    state: &RsgState<T>,
    x: &DMatrix<T>,
    y: &DMatrix<T>,
    log: PcaLog,
) -> Result<PcaGradient<T>> {
    let (u_tilde, su) = view_pca_gradient(&state.u_tilde, x, log)?;
    let (v_tilde, sv) = view_pca_gradient(&state.v_tilde, y, log)?;
    Ok(PcaGradient {
        u_tilde,
        v_tilde,
        skipped_blocks: su + sv,
    })
}

/// Euclidean partial derivatives of `F̃ = trace(Q_uᵀS_uᵀŨᵀ C Ṽ S_v Q_v)`.
pub fn cca_euclidean_gradients<T: Scalar>(state: &RsgState<T>, c_xy: &DMatrix<T>) -> Result<RawFactors<T>> {
    if c_xy.shape() != state.dims() {
        return Err(Error::Dimension(format!(
            "cross-covariance is {:?}, state expects {:?}",
            c_xy.shape(),
            state.dims()
        )));
    }
    let (ut, vt) = (state.u_tilde.matrix(), state.v_tilde.matrix());
    let (su, sv) = (state.s_u.matrix(), state.s_v.matrix());
    let (qu, qv) = (state.q_u.matrix(), state.q_v.matrix());
    let c_v = c_xy * vt;
    let ct_u = c_xy.tr_mul(ut);
    let m = ut.tr_mul(&c_v);
    // a = S_u Q_u, b = S_v Q_v, so F̃ = trace(aᵀ M b).
    let a = su * qu;
    let b = sv * qv;
    Ok(RawFactors {
        u_tilde: &c_v * &b * a.transpose(),
        v_tilde: &ct_u * &a * b.transpose(),
        s_u: &m * &b * qu.transpose(),
        s_v: m.transpose() * &a * qv.transpose(),
        q_u: su.transpose() * &m * &b,
        q_v: sv.transpose() * m.transpose() * &a,
    })
}

/// Projects raw Euclidean gradients onto each factor's tangent space. The SO(k) slot holds
/// `Q (G − Gᵀ)`: the antisymmetrized gradient read as a Lie-algebra element and translated
/// to `Q`.
pub fn riemannian_project<T: Scalar>(
    state: &RsgState<T>,
    raw: &RawFactors<T>,
    projection: StiefelProjection,
) -> Result<GradientBundle<T>> {
    let so = |q: &crate::manifold::SoPoint<T>, g: &DMatrix<T>| -> Result<TangentVector<T>> {
        if g.shape() != q.matrix().shape() {
            return Err(Error::Dimension(format!("SO gradient is {:?}", g.shape())));
        }
        let omega = so_project_tangent(g)?;
        q.translate(omega.ambient())
    };
    let upper = |s: &crate::manifold::UpperTriangular<T>, g: &DMatrix<T>| -> Result<TangentVector<T>> {
        if g.shape() != s.matrix().shape() {
            return Err(Error::Dimension(format!(
                "upper-triangular gradient is {:?}",
                g.shape()
            )));
        }
        s.tangent(&upper_project(g))
    };
    Ok(GradientBundle {
        u_tilde: projection.apply(&state.u_tilde, &raw.u_tilde)?,
        v_tilde: projection.apply(&state.v_tilde, &raw.v_tilde)?,
        s_u: upper(&state.s_u, &raw.s_u)?,
        s_v: upper(&state.s_v, &raw.s_v)?,
        q_u: so(&state.q_u, &raw.q_u)?,
        q_v: so(&state.q_v, &raw.q_v)?,
    })
}

/// Adds the PCA gradient into the `Ũ`, `Ṽ` slots; the other slots pass through.
pub fn combine<T: Scalar>(pca: &PcaGradient<T>, cca: &GradientBundle<T>) -> Result<GradientBundle<T>> {
    Ok(GradientBundle {
        u_tilde: cca.u_tilde.try_add(&pca.u_tilde)?,
        v_tilde: cca.v_tilde.try_add(&pca.v_tilde)?,
        ..cca.clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rsg::init_state;
    use approx::assert_relative_eq;

    fn unit_state(d: usize) -> RsgState<f64> {
        let e1 = StiefelPoint::new(DMatrix::from_fn(d, 1, |i, _| if i == 0 { 1.0 } else { 0.0 })).unwrap();
        RsgState::with_bases(e1.clone(), e1).unwrap()
    }

    #[test]
    fn zero_cross_covariance_gives_zero_gradients() {
        let s = init_state::<f64>(5, 4, 2, 0).unwrap();
        let raw = cca_euclidean_gradients(&s, &DMatrix::zeros(5, 4)).unwrap();
        assert!(raw.as_array().iter().all(|m| m.iter().all(|&v| v == 0.0)));
        let b = riemannian_project(&s, &raw, StiefelProjection::Paper).unwrap();
        assert!(b.as_array().iter().all(|t| t.norm() == 0.0));
    }

    #[test]
    fn scalar_chain_rule() {
        let s = unit_state(2);
        let c = DMatrix::from_row_slice(2, 2, &[0.7, 0.0, 0.0, -0.2]);
        let raw = cca_euclidean_gradients(&s, &c).unwrap();
        assert_relative_eq!(raw.s_u[(0, 0)], 0.7);
        assert_relative_eq!(raw.q_v[(0, 0)], 0.7);
    }

    #[test]
    fn pca_gradient_hand_case() {
        let theta = std::f64::consts::FRAC_PI_6;
        let s = unit_state(3);
        let x = DMatrix::from_row_slice(1, 3, &[theta.cos(), theta.sin(), 0.0]);
        let g = pca_gradient(&s, &x, &x, PcaLog::Table).unwrap();
        assert_relative_eq!(g.u_tilde.ambient()[(1, 0)], -theta.tan(), epsilon = 1e-15);
        assert_relative_eq!(g.u_tilde.ambient()[(0, 0)], 0.0, epsilon = 1e-15);
        assert_eq!(g.skipped_blocks, 0);
    }

    #[test]
    fn pca_gradient_sums_identical_blocks_and_drops_tail() {
        let s = init_state::<f64>(4, 4, 2, 5).unwrap();
        let block = DMatrix::from_row_slice(2, 4, &[1.0, 0.2, 0.0, 0.1, 0.0, 1.0, 0.3, 0.0]);
        let mut batch = DMatrix::zeros(7, 4);
        for l in 0..3 {
            batch.rows_mut(2 * l, 2).copy_from(&block);
        }
        batch.row_mut(6).fill(1.0);
        let one = pca_gradient(&s, &block, &block, PcaLog::Geodesic).unwrap();
        let three = pca_gradient(&s, &batch, &batch, PcaLog::Geodesic).unwrap();
        assert!((three.u_tilde.ambient() - one.u_tilde.ambient() * 3.0).norm() <= 1e-12);
    }

    #[test]
    fn pca_gradient_vanishes_on_own_span() {
        let s = init_state::<f64>(5, 5, 2, 8).unwrap();
        let batch = DMatrix::from_fn(6, 5, |r, c| s.u_tilde.matrix()[(c, r % 2)] * (1.0 + r as f64));
        let g = pca_gradient(&s, &batch, &batch, PcaLog::Table).unwrap();
        assert!(g.u_tilde.norm() <= 1e-12);
    }

    #[test]
    fn degenerate_blocks_are_skipped() {
        let s = init_state::<f64>(3, 3, 2, 1).unwrap();
        let batch = DMatrix::from_row_slice(4, 3, &[1.0, 2.0, 3.0, 1.0, 2.0, 3.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let g = pca_gradient(&s, &batch, &batch, PcaLog::Geodesic).unwrap();
        assert_eq!(g.skipped_blocks, 2);
    }

    #[test]
    fn symmetric_q_gradient_projects_to_zero() {
        let s = init_state::<f64>(4, 4, 2, 2).unwrap();
        let mut raw = cca_euclidean_gradients(&s, &DMatrix::zeros(4, 4)).unwrap();
        raw.q_u = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 5.0]);
        let b = riemannian_project(&s, &raw, StiefelProjection::Paper).unwrap();
        assert_eq!(b.q_u.norm(), 0.0);
    }

    #[test]
    fn projection_is_idempotent() {
        let s = init_state::<f64>(6, 5, 3, 4).unwrap();
        let c = DMatrix::from_fn(6, 5, |i, j| ((i * 5 + j) as f64 * 0.7).sin());
        let raw = cca_euclidean_gradients(&s, &c).unwrap();
        // The `Paper` variant `G − XGᵀX` is not a projector; only the canonical one is idempotent.
        let once = riemannian_project(&s, &raw, StiefelProjection::Canonical).unwrap();
        let again = RawFactors {
            u_tilde: once.u_tilde.ambient().clone(),
            v_tilde: once.v_tilde.ambient().clone(),
            s_u: once.s_u.ambient().clone(),
            s_v: once.s_v.ambient().clone(),
            ..raw.clone()
        };
        let twice = riemannian_project(&s, &again, StiefelProjection::Canonical).unwrap();
        for (a, b) in once.as_array().iter().zip(twice.as_array()).take(4) {
            assert!((a.ambient() - b.ambient()).norm() <= 1e-12);
        }
        // `G − Gᵀ` maps an antisymmetric Ω to 2Ω.
        let omega = so_project_tangent(&raw.q_u).unwrap();
        let doubled = so_project_tangent(omega.ambient()).unwrap();
        assert!((doubled.ambient() - omega.ambient() * 2.0).norm() <= 1e-12);
    }

    #[test]
    fn combine_adds_only_basis_slots() {
        let s = init_state::<f64>(4, 4, 2, 6).unwrap();
        let c = DMatrix::from_fn(4, 4, |i, j| (i as f64) - (j as f64) * 0.5);
        let bundle =
            riemannian_project(&s, &cca_euclidean_gradients(&s, &c).unwrap(), StiefelProjection::Paper).unwrap();
        let x = DMatrix::from_fn(4, 4, |i, j| ((i + 2 * j) as f64).cos());
        let pca = pca_gradient(&s, &x, &x, PcaLog::Geodesic).unwrap();
        let sum = combine(&pca, &bundle).unwrap();
        assert_eq!(
            sum.u_tilde.ambient(),
            &(bundle.u_tilde.ambient() + pca.u_tilde.ambient())
        );
        assert_eq!(sum.q_u, bundle.q_u);
        assert_eq!(sum.s_v, bundle.s_v);

        let zero = GradientBundle::zeros(&s);
        let only_pca = combine(&pca, &zero).unwrap();
        assert_eq!(only_pca.u_tilde.ambient(), pca.u_tilde.ambient());
        assert_eq!(only_pca.q_v.norm(), 0.0);
    }

    #[test]
    fn combine_rejects_stale_pca_gradient() {
        let a = init_state::<f64>(4, 4, 2, 1).unwrap();
        let b = init_state::<f64>(4, 4, 2, 2).unwrap();
        let x = DMatrix::from_fn(4, 4, |i, j| ((i + j) as f64).sin() + if i == j { 2.0 } else { 0.0 });
        let pca = pca_gradient(&a, &x, &x, PcaLog::Geodesic).unwrap();
        assert!(matches!(
            combine(&pca, &GradientBundle::zeros(&b)),
            Err(Error::StaleGradient)
        ));
    }
}
