use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::cca::CovarianceTriple;
use crate::error::{Error, Result};
use crate::manifold::linalg::singular_values;
use crate::manifold::orthonormalize;
use crate::stream::ViewPairBatch;
use crate::Scalar;

/// Latent-factor model `x = a z + σ ε_x`, `y = b z + σ ε_y`, `z ∼ N(0, I)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticGaussianSpec<T: Scalar> {
    pub a: DMatrix<T>,
    pub b: DMatrix<T>,
    pub noise_scale: T,
    pub seed: u64,
}

impl<T: Scalar> SyntheticGaussianSpec<T> {
    /// Loadings must both be full column rank, or both be exactly zero (a pure-noise model).
    pub fn new(a: DMatrix<T>, b: DMatrix<T>, noise_scale: T, seed: u64) -> Result<Self> {
        if a.ncols() != b.ncols() || a.ncols() == 0 {
            return Err(Error::Spec(format!(
                "loadings have {} and {} latent columns",
                a.ncols(),
                b.ncols()
            )));
        }
        if !(noise_scale >= T::zero()) {
            return Err(Error::Spec(format!("noise scale {noise_scale} must be nonnegative")));
        }
        let zero = |m: &DMatrix<T>| m.iter().all(|v| *v == T::zero());
        if !(zero(&a) && zero(&b)) {
            for (name, m) in [("a", &a), ("b", &b)] {
                if m.ncols() > m.nrows() {
                    return Err(Error::Spec(format!("loading {name} is wider than tall")));
                }
                let sv = singular_values(m);
                let smallest = sv[sv.len() - 1];
                if !(smallest > sv[0] * T::lit(1e-10)) {
                    return Err(Error::Spec(format!("loading {name} is rank deficient")));
                }
            }
        }
        Ok(Self {
            a,
            b,
            noise_scale,
            seed,
        })
    }

    /// Loadings `A·diag(α)`, `B·diag(α)` with random orthonormal `A`, `B` drawn from `seed`.
    ///
    /// The population canonical correlations are then `αᵢ² / (αᵢ² + σ²)`, and the leading
    /// principal subspace of each view coincides with its canonical subspace.
    pub fn planted(d_x: usize, d_y: usize, strengths: &[f64], noise_scale: f64, seed: u64) -> Result<Self> {
        let k = strengths.len();
        if k == 0 || k > d_x.min(d_y) {
            return Err(Error::Spec(format!("k_true = {k} must be in 1..={}", d_x.min(d_y))));
        }
        // Loadings come from their own stream so that the sample stream for `seed` is
        // independent of them.
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
        let mut draw = |rows: usize| -> Result<DMatrix<T>> {
            let g = DMatrix::from_fn(rows, k, |_, _| T::lit(StandardNormal.sample(&mut rng)));
            let basis = orthonormalize(&g)?.into_matrix();
            Ok(basis * DMatrix::from_diagonal(&DVector::from_iterator(k, strengths.iter().map(|&s| T::lit(s)))))
        };
        let a = draw(d_x)?;
        let b = draw(d_y)?;
        Self::new(a, b, T::lit(noise_scale), seed)
    }

    pub fn d_x(&self) -> usize {
        self.a.nrows()
    }

    pub fn d_y(&self) -> usize {
        self.b.nrows()
    }

    pub fn k_true(&self) -> usize {
        self.a.ncols()
    }

    /// `C_X = aaᵀ + σ²I`, `C_Y = bbᵀ + σ²I`, `C_XY = abᵀ` (with `n` reported as 0).
    pub fn population_covariance(&self) -> Result<CovarianceTriple<T>> {
        let s2 = self.noise_scale * self.noise_scale;
        let c_x = &self.a * self.a.transpose() + DMatrix::identity(self.d_x(), self.d_x()) * s2;
        let c_y = &self.b * self.b.transpose() + DMatrix::identity(self.d_y(), self.d_y()) * s2;
        let c_xy = &self.a * self.b.transpose();
        CovarianceTriple::new(c_x, c_y, c_xy, 0)
    }
}

/// Streams `n` samples from the model in batches of `batch_size` (the last may be short).
pub fn gen_synthetic<T: Scalar>(
    spec: &SyntheticGaussianSpec<T>,
    n: usize,
    batch_size: usize,
) -> Result<SyntheticStream<T>> {
    if n == 0 {
        return Err(Error::InsufficientData("requested zero samples".into()));
    }
    if batch_size == 0 {
        return Err(Error::Dimension("batch size must be positive".into()));
    }
    Ok(SyntheticStream {
        spec: spec.clone(),
        rng: ChaCha8Rng::seed_from_u64(spec.seed),
        remaining: n,
        batch_size,
        index: 0,
    })
}

pub struct SyntheticStream<T: Scalar> {
    spec: SyntheticGaussianSpec<T>,
    rng: ChaCha8Rng,
    remaining: usize,
    batch_size: usize,
    index: usize,
}

impl<T: Scalar> Iterator for SyntheticStream<T> {
    type Item = Result<ViewPairBatch<T>>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.remaining == 0 {
            return None;
        }
        let rows = self.batch_size.min(self.remaining);
        self.remaining -= rows;
        let (dx, dy, k) = (self.spec.d_x(), self.spec.d_y(), self.spec.k_true());
        let sigma = self.spec.noise_scale;
        let mut x = DMatrix::zeros(rows, dx);
        let mut y = DMatrix::zeros(rows, dy);
        let mut z = DVector::zeros(k);
        for r in 0..rows {
            // Per row: latent, then x noise, then y noise.
            for v in z.iter_mut() {
                *v = T::lit(StandardNormal.sample(&mut self.rng));
            }
            let ax = &self.spec.a * &z;
            let by = &self.spec.b * &z;
            for c in 0..dx {
                let e: f64 = StandardNormal.sample(&mut self.rng);
                x[(r, c)] = ax[c] + sigma * T::lit(e);
            }
            for c in 0..dy {
                let e: f64 = StandardNormal.sample(&mut self.rng);
                y[(r, c)] = by[c] + sigma * T::lit(e);
            }
        }
        let batch = ViewPairBatch::new(x, y, self.index);
        self.index += 1;
        Some(batch)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cca::{estimate_covariances, exact_cca};
    use crate::stream::collect_views;

    #[test]
    fn batch_sizes_and_reproducibility() {
        let spec = SyntheticGaussianSpec::<f64>::planted(5, 4, &[2.0, 1.0], 0.5, 3).unwrap();
        let sizes: Vec<usize> = gen_synthetic(&spec, 250, 100)
            .unwrap()
            .map(|b| b.unwrap().rows())
            .collect();
        assert_eq!(sizes, vec![100, 100, 50]);
        let a = collect_views(gen_synthetic(&spec, 250, 100).unwrap()).unwrap();
        let b = collect_views(gen_synthetic(&spec, 250, 7).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_rank_deficient_loadings() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 2.0, 4.0, 3.0, 6.0]);
        let b = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(SyntheticGaussianSpec::new(a, b, 0.1, 0), Err(Error::Spec(_))));
    }

    #[test]
    fn zero_loadings_are_pure_noise() {
        let z = DMatrix::<f64>::zeros(6, 2);
        let spec = SyntheticGaussianSpec::new(z.clone(), z, 1.0, 5).unwrap();
        let (x, y) = collect_views(gen_synthetic(&spec, 20_000, 1000).unwrap()).unwrap();
        let sol = exact_cca(&estimate_covariances(&x, &y, true).unwrap(), 2, 0.0).unwrap();
        assert!(sol.correlations[0] < 0.1);
    }

    #[test]
    fn noiseless_identity_views_coincide() {
        let i = DMatrix::<f64>::identity(3, 3);
        let spec = SyntheticGaussianSpec::new(i.clone(), i, 0.0, 1).unwrap();
        let (x, y) = collect_views(gen_synthetic(&spec, 100, 30).unwrap()).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn population_correlations_closed_form() {
        let spec = SyntheticGaussianSpec::<f64>::planted(8, 6, &[3.0, 1.0], 0.5, 9).unwrap();
        let pop = exact_cca(&spec.population_covariance().unwrap(), 2, 0.0).unwrap();
        assert!((pop.correlations[0] - 9.0 / 9.25).abs() < 1e-12);
        assert!((pop.correlations[1] - 1.0 / 1.25).abs() < 1e-12);
    }
}
