//! Matrix exponential and principal logarithm for small square matrices.
//!
//! `matrix_exp_small` is scaling-and-squaring with a degree-13 Padé approximant;
//! `matrix_log_small` is inverse scaling-and-squaring: repeated Denman–Beavers
//! square roots until the argument is near the identity, then the Gregory series
//! `log A = 2 atanh((A − I)(A + I)⁻¹)`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::Scalar;

pub const MAX_ORDER: usize = 64;

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

fn norm_1<T: Scalar>(a: &DMatrix<T>) -> T {
    let mut best = T::zero();
    for col in a.column_iter() {
        let s = col.iter().fold(T::zero(), |acc, &v| acc + v.abs());
        if s > best {
            best = s;
        }
    }
    best
}

fn check_square<T: Scalar>(a: &DMatrix<T>) -> Result<usize> {
    let (r, c) = a.shape();
    if r != c {
        return Err(Error::Dimension(format!("expected a square matrix, got {r}x{c}")));
    }
    if r > MAX_ORDER {
        return Err(Error::Dimension(format!(
            "matrix functions are limited to order {MAX_ORDER}, got {r}"
        )));
    }
    Ok(r)
}

pub fn matrix_exp_small<T: Scalar>(a: &DMatrix<T>) -> Result<DMatrix<T>> {
    let n = check_square(a)?;
    let eye = DMatrix::<T>::identity(n, n);
    if n == 0 {
        return Ok(eye);
    }
    let norm = norm_1(a).to_f64_lossy();
    if !norm.is_finite() {
        return Err(Error::Dimension("matrix exponential of non-finite input".into()));
    }
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a * T::lit(0.5f64.powi(squarings));
    let b = |i: usize| T::lit(PADE13[i]);

    let a2 = &scaled * &scaled;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let inner_u = &a6 * (&a6 * b(13) + &a4 * b(11) + &a2 * b(9));
    let u = &scaled * (inner_u + &a6 * b(7) + &a4 * b(5) + &a2 * b(3) + &eye * b(1));
    let inner_v = &a6 * (&a6 * b(12) + &a4 * b(10) + &a2 * b(8));
    let v = inner_v + &a6 * b(6) + &a4 * b(4) + &a2 * b(2) + &eye * b(0);

    let mut result = (&v - &u)
        .lu()
        .solve(&(&v + &u))
        .ok_or_else(|| Error::Dimension("singular Padé denominator".into()))?;
    for _ in 0..squarings {
        result = &result * &result;
    }
    Ok(result)
}

fn sqrt_denman_beavers<T: Scalar>(a: &DMatrix<T>) -> Result<DMatrix<T>> {
    let n = a.nrows();
    let mut y = a.clone();
    let mut z = DMatrix::<T>::identity(n, n);
    let half = T::lit(0.5);
    let tol = T::default_epsilon() * T::lit(16.0);
    for _ in 0..100 {
        let y_inv = y.clone().lu().try_inverse();
        let z_inv = z.clone().lu().try_inverse();
        let (Some(y_inv), Some(z_inv)) = (y_inv, z_inv) else {
            return Err(Error::LogBranch("square-root iteration hit a singular iterate".into()));
        };
        let y_next = (&y + z_inv) * half;
        let z_next = (&z + y_inv) * half;
        let change = norm_1(&(&y_next - &y));
        let scale = norm_1(&y_next);
        y = y_next;
        z = z_next;
        if !scale.is_finite() {
            break;
        }
        if change <= tol * scale {
            return Ok(y);
        }
    }
    Err(Error::LogBranch(
        "square-root iteration did not converge (eigenvalue on the negative real axis?)".into(),
    ))
}

pub fn matrix_log_small<T: Scalar>(a: &DMatrix<T>) -> Result<DMatrix<T>> {
    let n = check_square(a)?;
    let eye = DMatrix::<T>::identity(n, n);
    if n == 0 {
        return Ok(eye);
    }
    let mut x = a.clone();
    let mut roots = 0;
    while norm_1(&(&x - &eye)) > T::lit(0.25) {
        if roots >= 60 {
            return Err(Error::LogBranch("too many square roots".into()));
        }
        x = sqrt_denman_beavers(&x)?;
        roots += 1;
    }
    let z = (&x - &eye)
        * (&x + &eye)
            .lu()
            .try_inverse()
            .ok_or_else(|| Error::LogBranch("A + I singular".into()))?;
    let z2 = &z * &z;
    let mut term = z.clone();
    let mut sum = z.clone();
    let eps = T::default_epsilon();
    for m in 1..200 {
        term = &term * &z2;
        let contribution = &term * (T::one() / T::from_usize(2 * m + 1).expect("small integer"));
        let size = norm_1(&contribution);
        sum += contribution;
        if size <= eps * norm_1(&sum) {
            break;
        }
    }
    Ok(sum * T::lit(2.0f64.powi(roots + 1)))
}
