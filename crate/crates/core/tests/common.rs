#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn gaussian(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

pub fn skew_with_norm(k: usize, norm: f64, seed: u64) -> DMatrix<f64> {
    let a = gaussian(k, k, seed);
    let s = &a - a.transpose();
    let n = s.norm();
    if n == 0.0 {
        s
    } else {
        s * (norm / n)
    }
}

/// Eight-row Hadamard columns: mutually orthogonal, zero mean, unit variance.
pub fn hadamard8() -> DMatrix<f64> {
    DMatrix::from_fn(8, 8, |i, j| if (i & j).count_ones() % 2 == 0 { 1.0 } else { -1.0 })
}

/// Two-view data with C_X = C_Y = I and C_XY = diag(0.9, 0.3), exactly.
pub fn hand_case() -> (DMatrix<f64>, DMatrix<f64>) {
    let h = hadamard8();
    let x = DMatrix::from_columns(&[h.column(1), h.column(2)]);
    let y1 = h.column(1) * 0.9 + h.column(3) * (1.0f64 - 0.81).sqrt();
    let y2 = h.column(2) * 0.3 + h.column(4) * (1.0f64 - 0.09).sqrt();
    let y = DMatrix::from_columns(&[y1, y2]);
    (x, y)
}
