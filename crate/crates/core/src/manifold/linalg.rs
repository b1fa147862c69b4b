//! Dense kernels shared by the manifold operations.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};

use crate::error::{Error, Result};
use crate::manifold::tol;
use crate::Scalar;

/// Thin SVD `M = U diag(s) Vᵀ` with singular values sorted nonincreasing.
pub struct ThinSvd<T: Scalar> {
    pub u: DMatrix<T>,
    pub singular_values: DVector<T>,
    pub v_t: DMatrix<T>,
}

type DynSvd<T> = SVD<T, nalgebra::Dyn, nalgebra::Dyn>;

/// Relative reconstruction error `‖M − UΣVᵀ‖_F / ‖M‖_F` accepted from a decomposition.
const SVD_RESIDUAL_REL: f64 = 1e-12;

fn svd_residual<T: Scalar>(m: &DMatrix<T>, svd: &DynSvd<T>) -> T {
    match (&svd.u, &svd.v_t) {
        (Some(u), Some(v_t)) => {
            let mut us = u.clone();
            for (j, s) in svd.singular_values.iter().enumerate() {
                us.column_mut(j).scale_mut(*s);
            }
            (us * v_t - m).norm()
        }
        _ => T::max_value().unwrap_or_else(T::one),
    }
}

/// nalgebra's default convergence threshold occasionally deflates too early on
/// rank-deficient inputs and returns a decomposition that does not reproduce `m` (seen
/// with ~1e-3 reconstruction error). Each candidate is checked, and tighter thresholds or
/// the transposed problem are tried in turn.
fn checked_svd<T: Scalar>(m: &DMatrix<T>) -> DynSvd<T> {
    let scale = m.norm();
    let accept = T::tol(SVD_RESIDUAL_REL, 100.0) * scale;
    let first = SVD::new(m.clone(), true, true);
    let mut best_residual = svd_residual(m, &first);
    if best_residual <= accept {
        return first;
    }
    let mut best = first;
    let eps = T::default_epsilon();
    let transposed = || {
        let t = SVD::new(m.transpose(), true, true);
        SVD {
            u: t.v_t.map(|v| v.transpose()),
            v_t: t.u.map(|u| u.transpose()),
            singular_values: t.singular_values,
        }
    };
    let attempts: [Box<dyn Fn() -> Option<DynSvd<T>>>; 3] = [
        Box::new(|| SVD::try_new(m.clone(), true, true, eps * T::lit(1e-2), 0)),
        Box::new(|| SVD::try_new(m.clone(), true, true, eps * T::lit(1e-4), 0)),
        Box::new(move || Some(transposed())),
    ];
    for attempt in attempts {
        let Some(candidate) = attempt() else { continue };
        let residual = svd_residual(m, &candidate);
        if residual < best_residual {
            best_residual = residual;
            best = candidate;
        }
        if best_residual <= accept {
            break;
        }
    }
    if best_residual > accept {
        log::warn!("SVD reconstruction residual {best_residual} exceeds {accept}");
    }
    best
}

pub fn thin_svd<T: Scalar>(m: &DMatrix<T>) -> ThinSvd<T> {
    let svd = checked_svd(m);
    ThinSvd {
        u: svd.u.expect("u requested"),
        singular_values: svd.singular_values,
        v_t: svd.v_t.expect("v_t requested"),
    }
}

pub fn singular_values<T: Scalar>(m: &DMatrix<T>) -> DVector<T> {
    checked_svd(m).singular_values
}

/// Absolute rank threshold `1e-12 · σ_max` (floored at the type's precision).
pub fn rank_tolerance<T: Scalar>(largest: T) -> T {
    largest * T::tol(tol::RANK_REL, 10.0)
}

/// Polar factor `U Vᵀ` of a full-column-rank matrix; this is the SVD retraction used by
/// both the Stiefel and Grassmann exponential maps.
pub fn polar_factor<T: Scalar>(m: &DMatrix<T>) -> Result<DMatrix<T>> {
    let svd = thin_svd(m);
    let n = svd.singular_values.len();
    let largest = svd.singular_values[0];
    let smallest = svd.singular_values[n - 1];
    let tolerance = rank_tolerance(largest);
    if !(smallest > tolerance) {
        return Err(Error::DegenerateRetraction {
            smallest: smallest.to_f64_lossy(),
            tolerance: tolerance.to_f64_lossy(),
        });
    }
    Ok(&svd.u * &svd.v_t)
}

/// Householder QR with the sign convention `diag(R) ≥ 0`.
///
/// Fails with [`Error::DegenerateBlock`] when the smallest singular value of `m`
/// (equal to that of `R`) falls below the rank tolerance.
pub fn qr_positive<T: Scalar>(m: &DMatrix<T>) -> Result<(DMatrix<T>, DMatrix<T>)> {
    let (rows, cols) = m.shape();
    if cols == 0 || cols > rows {
        return Err(Error::Dimension(format!(
            "orthonormalize needs 0 < k <= d, got {rows}x{cols}"
        )));
    }
    let qr = m.clone().qr();
    let mut q = qr.q();
    let mut r = qr.unpack_r();
    for i in 0..cols {
        if r[(i, i)] < T::zero() {
            q.column_mut(i).neg_mut();
            r.row_mut(i).neg_mut();
        }
    }
    let sv = singular_values(&r);
    let largest = sv[0];
    let smallest = sv[sv.len() - 1];
    if !(smallest > rank_tolerance(largest)) || largest == T::zero() {
        return Err(Error::DegenerateBlock {
            smallest: smallest.to_f64_lossy(),
        });
    }
    Ok((q, r))
}

/// RQ factorization `W = S Q` of a square matrix: `S` upper triangular, `Q` orthogonal with
/// `det Q = +1`. When the orthogonal factor comes out as a reflection, the first row of `Q`
/// and the first column of `S` are negated together.
pub fn rq_special<T: Scalar>(w: &DMatrix<T>) -> (DMatrix<T>, DMatrix<T>) {
    let k = w.nrows();
    // With P the exchange matrix: (P W)ᵀ = Q₁R₁  ⇒  W = (P R₁ᵀ P)(P Q₁ᵀ).
    let pw = DMatrix::from_fn(k, k, |i, j| w[(k - 1 - i, j)]);
    let qr = pw.transpose().qr();
    let q1 = qr.q();
    let r1 = qr.unpack_r();
    let mut s = DMatrix::from_fn(k, k, |i, j| r1[(k - 1 - j, k - 1 - i)]);
    let mut q = DMatrix::from_fn(k, k, |i, j| q1[(j, k - 1 - i)]);
    for i in 0..k {
        for j in 0..i {
            s[(i, j)] = T::zero();
        }
    }
    if q.determinant() < T::zero() {
        q.row_mut(0).neg_mut();
        s.column_mut(0).neg_mut();
    }
    (s, q)
}

/// Symmetric eigendecomposition with eigenvalues sorted nonincreasing.
pub fn sym_eigen_sorted<T: Scalar>(c: &DMatrix<T>) -> (DVector<T>, DMatrix<T>) {
    let sym = symmetrize(c);
    let eig = SymmetricEigen::new(sym);
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = DVector::from_fn(n, |i, _| eig.eigenvalues[order[i]]);
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// `(A + Aᵀ)/2`.
pub fn symmetrize<T: Scalar>(a: &DMatrix<T>) -> DMatrix<T> {
    (a + a.transpose()) * T::lit(0.5)
}

/// `(A − Aᵀ)/2`.
pub fn skew<T: Scalar>(a: &DMatrix<T>) -> DMatrix<T> {
    (a - a.transpose()) * T::lit(0.5)
}

/// Inverse square root of a symmetric positive-definite matrix, eigenvalues floored at `floor`.
pub fn sym_inv_sqrt<T: Scalar>(c: &DMatrix<T>, floor: T) -> DMatrix<T> {
    let (values, vectors) = sym_eigen_sorted(c);
    let scaled = DMatrix::from_fn(vectors.nrows(), vectors.ncols(), |r, col| {
        let lambda = if values[col] > floor { values[col] } else { floor };
        vectors[(r, col)] / lambda.sqrt()
    });
    &scaled * vectors.transpose()
}

/// Principal angles between the column spans of two orthonormal bases, nondecreasing.
pub fn principal_angles<T: Scalar>(x: &DMatrix<T>, y: &DMatrix<T>) -> Vec<T> {
    let sv = singular_values(&(x.transpose() * y));
    let mut angles: Vec<T> = sv
        .iter()
        .map(|&s| {
            let c = if s > T::one() { T::one() } else { s };
            c.acos()
        })
        .collect();
    angles.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    angles
}

/// `‖X Xᵀ − Y Yᵀ‖_F` for orthonormal bases, computed as `√2 ‖(I − XXᵀ) Y‖_F` (both equal
/// `√2 ‖sin θ‖` over the principal angles) without forming d×d projectors.
pub fn projector_distance<T: Scalar>(x: &DMatrix<T>, y: &DMatrix<T>) -> T {
    let residual = y - x * (x.transpose() * y);
    residual.norm() * T::lit(2.0).sqrt()
}

/// `‖Mᵀ M − I‖_F`.
pub fn orthonormality_residual<T: Scalar>(m: &DMatrix<T>) -> T {
    let k = m.ncols();
    (m.transpose() * m - DMatrix::identity(k, k)).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn thin_svd_reconstructs_rank_deficient_inputs() {
        for seed in 0..200 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut g = |r: usize, c: usize| DMatrix::from_fn(r, c, |_, _| rng.sample::<f64, _>(StandardNormal));
            let m = g(6, 2) * g(2, 5);
            let svd = thin_svd(&m);
            let mut us = svd.u.clone();
            for (j, s) in svd.singular_values.iter().enumerate() {
                us.column_mut(j).scale_mut(*s);
            }
            assert!((us * &svd.v_t - &m).norm() <= 1e-12 * m.norm(), "seed {seed}");
            for w in svd.singular_values.as_slice().windows(2) {
                assert!(w[0] >= w[1]);
            }
        }
    }

    #[test]
    fn rq_reconstructs_and_is_special() {
        let w = DMatrix::from_row_slice(3, 3, &[2.0, -1.0, 0.5, 0.3, 1.5, -2.0, 1.0, 0.2, 0.7]);
        let (s, q) = rq_special(&w);
        assert_relative_eq!(&s * &q, w, epsilon = 1e-12);
        assert_relative_eq!(q.determinant(), 1.0, epsilon = 1e-12);
        assert!(orthonormality_residual(&q) < 1e-12);
        for i in 0..3 {
            for j in 0..i {
                assert_eq!(s[(i, j)], 0.0);
            }
        }
    }

    #[test]
    fn qr_positive_diagonal() {
        let m = DMatrix::from_row_slice(3, 2, &[-2.0, 0.0, 0.0, -3.0, 0.0, 0.0]);
        let (q, r) = qr_positive(&m).unwrap();
        assert!(r[(0, 0)] > 0.0 && r[(1, 1)] > 0.0);
        assert_relative_eq!(&q * &r, m, epsilon = 1e-14);
    }

    #[test]
    fn qr_rejects_rank_deficient() {
        let m = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 2.0, 4.0, 3.0, 6.0]);
        assert!(matches!(qr_positive(&m), Err(Error::DegenerateBlock { .. })));
    }

    #[test]
    fn projector_distance_matches_dense() {
        let x = DMatrix::from_row_slice(3, 1, &[1.0, 0.0, 0.0]);
        let t: f64 = 0.4;
        let y = DMatrix::from_row_slice(3, 1, &[t.cos(), t.sin(), 0.0]);
        let dense = (&x * x.transpose() - &y * y.transpose()).norm();
        assert_relative_eq!(projector_distance(&x, &y), dense, epsilon = 1e-12);
    }
}
