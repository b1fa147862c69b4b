use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::manifold::linalg::{rq_special, sym_eigen_sorted, sym_inv_sqrt};
use crate::manifold::{
    so_exp, st_exp, upper_project, SoPoint, StiefelPoint, UpperTriangular, SO_BALL_RADIUS, STIEFEL_BALL_RADIUS,
};
use crate::rsg::{
    cca_euclidean_gradients, combine, init_state, pca_gradient, riemannian_project, CrossCovariance, GradientBundle,
    Hyperparams, RsgState, Whitening,
};
use crate::stream::ViewPairBatch;
use crate::Scalar;

/// Per-step bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepReport {
    /// Batches consumed after this step.
    pub j: u64,
    pub gamma: f64,
    pub skipped_blocks: usize,
    /// Largest `‖γ ∇‖_F` over the two Stiefel factors.
    pub stiefel_update_norm: f64,
    /// Largest `‖γ ∇‖_F` over the two rotation factors.
    pub so_update_norm: f64,
    pub outside_ball: bool,
    pub whitening_restored: bool,
}

/// Moves every factor along `Exp(−γ ∇)` and increments `j`.
pub fn update<T: Scalar>(state: &RsgState<T>, bundle: &GradientBundle<T>, gamma: T) -> Result<RsgState<T>> {
    if !(gamma > T::zero()) {
        return Err(Error::InvalidTangent(format!("step size {gamma} must be positive")));
    }
    let step = -gamma;
    Ok(RsgState {
        u_tilde: st_exp(&state.u_tilde, &bundle.u_tilde.scaled(step))?,
        v_tilde: st_exp(&state.v_tilde, &bundle.v_tilde.scaled(step))?,
        s_u: state.s_u.exp(&bundle.s_u.scaled(step))?,
        s_v: state.s_v.exp(&bundle.s_v.scaled(step))?,
        q_u: so_exp(&state.q_u, &bundle.q_u.scaled(step))?,
        q_v: so_exp(&state.q_v, &bundle.q_v.scaled(step))?,
        j: state.j + 1,
    })
}

fn check_batch<T: Scalar>(state: &RsgState<T>, x: &DMatrix<T>, y: &DMatrix<T>) -> Result<()> {
    if x.nrows() != y.nrows() {
        return Err(Error::RowCountMismatch {
            x_rows: x.nrows(),
            y_rows: y.nrows(),
        });
    }
    if (x.ncols(), y.ncols()) != state.dims() {
        return Err(Error::Dimension(format!(
            "batch widths {:?} do not match state {:?}",
            (x.ncols(), y.ncols()),
            state.dims()
        )));
    }
    Ok(())
}

fn step_with_cross<T: Scalar>(
    state: &RsgState<T>,
    x: &DMatrix<T>,
    y: &DMatrix<T>,
    c_xy: &DMatrix<T>,
    hyper: &Hyperparams,
) -> Result<(RsgState<T>, StepReport)> {
    let pca = pca_gradient(state, x, y, hyper.pca_log)?;
    // Stored gradients are of L = −F̃, so the Euclidean CCA partials enter negated.
    let raw = cca_euclidean_gradients(state, c_xy)?.negated();
    let bundle = combine(&pca, &riemannian_project(state, &raw, hyper.stiefel_projection)?)?;
    let gamma = hyper.step_size(state.j);
    let next = update(state, &bundle, T::lit(gamma))?;

    let stiefel_update_norm = gamma * bundle.u_tilde.norm().max(bundle.v_tilde.norm()).to_f64_lossy();
    let so_update_norm = gamma * bundle.q_u.norm().max(bundle.q_v.norm()).to_f64_lossy();
    let outside_ball = stiefel_update_norm > STIEFEL_BALL_RADIUS || so_update_norm > SO_BALL_RADIUS;
    if outside_ball {
        log::debug!(
            "step {}: update norms {stiefel_update_norm:.3e} (St) / {so_update_norm:.3e} (SO) exceed the injectivity radius",
            state.j
        );
    }
    Ok((
        next,
        StepReport {
            j: state.j + 1,
            gamma,
            skipped_blocks: pca.skipped_blocks,
            stiefel_update_norm,
            so_update_norm,
            outside_ball,
            whitening_restored: false,
        },
    ))
}

/// One pass of the algorithm's loop body on the batch `(X_j, Y_j)`, using the batch
/// cross-covariance `(1/B) X_jᵀ Y_j`.
pub fn step_detailed<T: Scalar>(
    state: &RsgState<T>,
    x: &DMatrix<T>,
    y: &DMatrix<T>,
    hyper: &Hyperparams,
) -> Result<(RsgState<T>, StepReport)> {
    check_batch(state, x, y)?;
    let b = T::from_usize(x.nrows()).expect("batch size fits scalar");
    let c_xy = x.tr_mul(y) / b;
    step_with_cross(state, x, y, &c_xy, hyper)
}

pub fn step<T: Scalar>(
    state: &RsgState<T>,
    x: &DMatrix<T>,
    y: &DMatrix<T>,
    hyper: &Hyperparams,
) -> Result<RsgState<T>> {
    Ok(step_detailed(state, x, y, hyper)?.0)
}

/// Rescales `W = S Q` so that `(ŨW)ᵀ C (ŨW) = I`, returning the new `(S, Q)` from an RQ
/// factorization of `W (WᵀŨᵀCŨW)^{-1/2}`. Returns `None` when that Gram matrix is not
/// positive definite.
pub fn restore_whitening<T: Scalar>(
    basis: &StiefelPoint<T>,
    s: &UpperTriangular<T>,
    q: &SoPoint<T>,
    second_moment: &DMatrix<T>,
) -> Option<(UpperTriangular<T>, SoPoint<T>)> {
    let ut = basis.matrix();
    let w = s.matrix() * q.matrix();
    let reduced = ut.tr_mul(&(second_moment * ut));
    let gram = w.transpose() * reduced * &w;
    let (values, _) = sym_eigen_sorted(&gram);
    let top = values[0];
    let bottom = values[values.len() - 1];
    if !(top > T::zero()) || !(bottom > top * T::tol(1e-12, 10.0)) {
        return None;
    }
    let rescaled = w * sym_inv_sqrt(&gram, T::zero());
    let (s_new, q_new) = rq_special(&rescaled);
    Some((upper_project(&s_new), SoPoint::new_unchecked(q_new)))
}

/// Owns a state and the running statistics needed by the optional whitening restoration
/// and running cross-covariance.
#[derive(Debug, Clone)]
pub struct RsgOptimizer<T: Scalar> {
    state: RsgState<T>,
    hyper: Hyperparams,
    second_x: DMatrix<T>,
    second_y: DMatrix<T>,
    cross_sum: DMatrix<T>,
    rows_seen: usize,
    skipped_blocks: usize,
    ball_violations: usize,
    max_update_norm: f64,
}

/// Feasibility is asserted every step in debug builds and at this interval in release.
const RELEASE_CHECK_INTERVAL: u64 = 100;

impl<T: Scalar> RsgOptimizer<T> {
    pub fn new(state: RsgState<T>, hyper: Hyperparams) -> Result<Self> {
        hyper.validate()?;
        if hyper.k != state.k() {
            return Err(Error::Dimension(format!(
                "hyperparameters say k = {}, state has {}",
                hyper.k,
                state.k()
            )));
        }
        let (dx, dy) = state.dims();
        Ok(Self {
            state,
            hyper,
            second_x: DMatrix::zeros(dx, dx),
            second_y: DMatrix::zeros(dy, dy),
            cross_sum: DMatrix::zeros(0, 0),
            rows_seen: 0,
            skipped_blocks: 0,
            ball_violations: 0,
            max_update_norm: 0.0,
        })
    }

    /// Random initial state from `hyper.seed`.
    pub fn init(d_x: usize, d_y: usize, hyper: Hyperparams) -> Result<Self> {
        hyper.validate()?;
        Self::new(init_state(d_x, d_y, hyper.k, hyper.seed)?, hyper)
    }

    pub fn state(&self) -> &RsgState<T> {
        &self.state
    }

    pub fn into_state(self) -> RsgState<T> {
        self.state
    }

    pub fn hyper(&self) -> &Hyperparams {
        &self.hyper
    }

    pub fn rows_seen(&self) -> usize {
        self.rows_seen
    }

    pub fn skipped_blocks(&self) -> usize {
        self.skipped_blocks
    }

    pub fn ball_violations(&self) -> usize {
        self.ball_violations
    }

    pub fn max_update_norm(&self) -> f64 {
        self.max_update_norm
    }

    /// Running uncentered second moments `(1/n) Σ XᵀX`, `(1/n) Σ YᵀY` of the data seen.
    pub fn second_moments(&self) -> Option<(DMatrix<T>, DMatrix<T>)> {
        if self.rows_seen == 0 {
            return None;
        }
        let n = T::from_usize(self.rows_seen).expect("row count fits scalar");
        Some((&self.second_x / n, &self.second_y / n))
    }

    pub fn consume(&mut self, batch: &ViewPairBatch<T>) -> Result<StepReport> {
        let (x, y) = (&batch.x, &batch.y);
        check_batch(&self.state, x, y)?;
        let b = T::from_usize(x.nrows()).expect("batch size fits scalar");
        let batch_cross = x.tr_mul(y);
        let c_xy = match self.hyper.cross_cov {
            CrossCovariance::Batch => &batch_cross / b,
            CrossCovariance::Running => {
                if self.cross_sum.is_empty() {
                    self.cross_sum = DMatrix::zeros(x.ncols(), y.ncols());
                }
                self.cross_sum += &batch_cross;
                let n = T::from_usize(self.rows_seen + x.nrows()).expect("row count fits scalar");
                &self.cross_sum / n
            }
        };
        let (mut next, mut report) = step_with_cross(&self.state, x, y, &c_xy, &self.hyper)?;

        self.rows_seen += x.nrows();
        if self.hyper.whitening == Whitening::Restore {
            self.second_x += x.tr_mul(x);
            self.second_y += y.tr_mul(y);
            let n = T::from_usize(self.rows_seen).expect("row count fits scalar");
            let (cx, cy) = (&self.second_x / n, &self.second_y / n);
            let ru = restore_whitening(&next.u_tilde, &next.s_u, &next.q_u, &cx);
            let rv = restore_whitening(&next.v_tilde, &next.s_v, &next.q_v, &cy);
            if let (Some((s_u, q_u)), Some((s_v, q_v))) = (ru, rv) {
                next.s_u = s_u;
                next.q_u = q_u;
                next.s_v = s_v;
                next.q_v = q_v;
                report.whitening_restored = true;
            }
        }

        if cfg!(debug_assertions) || next.j % RELEASE_CHECK_INTERVAL == 0 {
            next.feasibility().check()?;
        }
        self.skipped_blocks += report.skipped_blocks;
        if report.outside_ball {
            self.ball_violations += 1;
        }
        self.max_update_norm = self
            .max_update_norm
            .max(report.stiefel_update_norm)
            .max(report.so_update_norm);
        self.state = next;
        Ok(report)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::principal_angles;
    use crate::rsg::{GradientBundle, PcaLog, Whitening};

    #[test]
    fn zero_bundle_only_advances_counter() {
        let s = init_state::<f64>(5, 4, 2, 3).unwrap();
        let next = update(&s, &GradientBundle::zeros(&s), 0.5).unwrap();
        assert_eq!(next.j, 1);
        assert!((next.u_tilde.matrix() - s.u_tilde.matrix()).norm() <= 1e-14);
        assert_eq!(next.s_u, s.s_u);
        assert_eq!(next.q_v, s.q_v);
    }

    #[test]
    fn one_step_moves_toward_block_span() {
        let theta = std::f64::consts::FRAC_PI_6;
        let e1 = StiefelPoint::new(DMatrix::from_column_slice(3, 1, &[1.0, 0.0, 0.0])).unwrap();
        let s = RsgState::with_bases(e1.clone(), e1).unwrap();
        let x = DMatrix::from_row_slice(1, 3, &[theta.cos(), theta.sin(), 0.0]);
        let y = DMatrix::from_row_slice(1, 3, &[1.0, 0.0, 0.0]);
        let mut h = Hyperparams::new(1);
        h.batch_size = 1;
        h.gamma0 = 0.1;
        h.pca_log = PcaLog::Table;
        let next = step(&s, &x, &y, &h).unwrap();
        let target = x.transpose() / x.norm();
        let before = principal_angles(s.u_tilde.matrix(), &target)[0];
        let after = principal_angles(next.u_tilde.matrix(), &target)[0];
        assert!(after < before, "{after} !< {before}");
    }

    #[test]
    fn step_is_deterministic_and_feasible() {
        let s = init_state::<f64>(6, 5, 2, 9).unwrap();
        let x = DMatrix::from_fn(10, 6, |i, j| ((i * 7 + j * 3) as f64).sin());
        let y = DMatrix::from_fn(10, 5, |i, j| ((i * 5 + j) as f64).cos());
        let h = Hyperparams::new(2);
        let a = step(&s, &x, &y, &h).unwrap();
        let b = step(&s, &x, &y, &h).unwrap();
        assert_eq!(a, b);
        let f = a.feasibility();
        assert!(f.stiefel_u <= 1e-10 && f.stiefel_v <= 1e-10);
        assert!(f.det_u <= 1e-8 && f.lower == 0.0);
    }

    #[test]
    fn restoration_whitens() {
        let mut h = Hyperparams::new(2);
        h.batch_size = 20;
        h.whitening = Whitening::Restore;
        let mut opt = RsgOptimizer::<f64>::init(5, 4, h).unwrap();
        let x = DMatrix::from_fn(20, 5, |i, j| ((i * 3 + j * 11) as f64).sin() * (1.0 + j as f64));
        let y = DMatrix::from_fn(20, 4, |i, j| ((i * 13 + j) as f64).cos());
        let batch = ViewPairBatch::new(x, y, 0).unwrap();
        let report = opt.consume(&batch).unwrap();
        assert!(report.whitening_restored);
        let (cx, _) = opt.second_moments().unwrap();
        let (u, _) = opt.state().extract_solution();
        assert!(crate::cca::whitening_residual(&u, &cx) <= 1e-10);
        assert!(opt.state().feasibility().check().is_ok());
    }

    #[test]
    fn rejects_mismatched_k() {
        let s = init_state::<f64>(5, 5, 2, 0).unwrap();
        assert!(RsgOptimizer::new(s, Hyperparams::new(3)).is_err());
    }
}
