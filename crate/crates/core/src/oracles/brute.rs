use nalgebra::{DMatrix, DVector};

use crate::cca::CcaSolution;
use crate::error::{Error, Result};

pub const BRUTE_MAX_DIM: usize = 30;
pub const BRUTE_MAX_ROWS: usize = 5000;

fn matmul(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    assert_eq!(a.ncols(), b.nrows());
    let mut out = DMatrix::zeros(a.nrows(), b.ncols());
    for i in 0..a.nrows() {
        for j in 0..b.ncols() {
            let mut s = 0.0;
            for l in 0..a.ncols() {
                s += a[(i, l)] * b[(l, j)];
            }
            out[(i, j)] = s;
        }
    }
    out
}

fn transpose(a: &DMatrix<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.ncols(), a.nrows(), |i, j| a[(j, i)])
}

/// Cyclic Jacobi eigensolver for a symmetric matrix; eigenvalues sorted nonincreasing,
/// eigenvectors in the matching columns.
pub fn jacobi_eigen(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = a.nrows();
    let mut m = DMatrix::from_fn(n, n, |i, j| 0.5 * (a[(i, j)] + a[(j, i)]));
    let mut v = DMatrix::<f64>::identity(n, n);
    let scale = m.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[(p, q)] * m[(p, q)];
            }
        }
        if off.sqrt() <= 1e-17 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for r in 0..n {
                    let (mrp, mrq) = (m[(r, p)], m[(r, q)]);
                    m[(r, p)] = c * mrp - s * mrq;
                    m[(r, q)] = s * mrp + c * mrq;
                }
                for r in 0..n {
                    let (mpr, mqr) = (m[(p, r)], m[(q, r)]);
                    m[(p, r)] = c * mpr - s * mqr;
                    m[(q, r)] = s * mpr + c * mqr;
                }
                for r in 0..n {
                    let (vrp, vrq) = (v[(r, p)], v[(r, q)]);
                    v[(r, p)] = c * vrp - s * vrq;
                    v[(r, q)] = s * vrp + c * vrq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(j, j)].total_cmp(&m[(i, i)]));
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    (values, vectors)
}

/// `C^{power}` for symmetric PSD `C` via Jacobi, eigenvalues clamped at `1e-12`.
fn sym_power(c: &DMatrix<f64>, power: f64) -> DMatrix<f64> {
    let (values, vectors) = jacobi_eigen(c);
    let n = values.len();
    let scaled = DMatrix::from_fn(n, n, |r, col| vectors[(r, col)] * values[col].max(1e-12).powf(power));
    matmul(&scaled, &transpose(&vectors))
}

fn centered_gram(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let mean = |m: &DMatrix<f64>, j: usize| (0..n).map(|i| m[(i, j)]).sum::<f64>() / n as f64;
    let ma: Vec<f64> = (0..a.ncols()).map(|j| mean(a, j)).collect();
    let mb: Vec<f64> = (0..b.ncols()).map(|j| mean(b, j)).collect();
    DMatrix::from_fn(a.ncols(), b.ncols(), |p, q| {
        (0..n).map(|i| (a[(i, p)] - ma[p]) * (b[(i, q)] - mb[q])).sum::<f64>() / n as f64
    })
}

/// CCA of mean-centered views from the symmetric eigenproblem
/// `C_X^{-1/2} C_XY C_Y^{-1} C_YX C_X^{-1/2} a = ρ² a`, with `u = C_X^{-1/2} a` and
/// `v = C_Y^{-1} C_YX u / ρ`.
pub fn brute_force_cca(x: &DMatrix<f64>, y: &DMatrix<f64>, k: usize) -> Result<CcaSolution<f64>> {
    let (n, dx, dy) = (x.nrows(), x.ncols(), y.ncols());
    if y.nrows() != n {
        return Err(Error::RowCountMismatch {
            x_rows: n,
            y_rows: y.nrows(),
        });
    }
    if n < 2 {
        return Err(Error::InsufficientData(format!("need at least 2 samples, got {n}")));
    }
    if dx.max(dy) > BRUTE_MAX_DIM || n > BRUTE_MAX_ROWS {
        return Err(Error::Dimension(format!(
            "brute-force oracle is limited to d <= {BRUTE_MAX_DIM}, N <= {BRUTE_MAX_ROWS}"
        )));
    }
    if k == 0 || k > dx.min(dy) {
        return Err(Error::Dimension(format!("k = {k} must be in 1..={}", dx.min(dy))));
    }
    let cx = centered_gram(x, x);
    let cy = centered_gram(y, y);
    let cxy = centered_gram(x, y);
    let wx = sym_power(&cx, -0.5);
    let cy_inv = sym_power(&cy, -1.0);
    let cyx = transpose(&cxy);
    let core = matmul(&matmul(&matmul(&matmul(&wx, &cxy), &cy_inv), &cyx), &wx);
    let (values, vectors) = jacobi_eigen(&core);

    let mut u_star = DMatrix::zeros(dx, k);
    let mut v_star = DMatrix::zeros(dy, k);
    let mut correlations = DVector::zeros(k);
    for c in 0..k {
        let rho = values[c].max(0.0).sqrt();
        let a = vectors.columns(c, 1).into_owned();
        let u = matmul(&wx, &a);
        let mut v = matmul(&matmul(&cy_inv, &cyx), &u);
        if rho > 0.0 {
            v /= rho;
        }
        u_star.set_column(c, &u.column(0));
        v_star.set_column(c, &v.column(0));
        correlations[c] = rho;
    }
    Ok(CcaSolution {
        u_star,
        v_star,
        correlations,
    })
}
