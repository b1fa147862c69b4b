use nalgebra::DMatrix;
use serde::Serialize;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::manifold::{matrix_exp_small, orthonormalize, upper_project, SoPoint};
use crate::rsg::{cca_euclidean_gradients, RawFactors, RsgState};

pub const DEFAULT_FD_STEP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum FactorId {
    UTilde,
    VTilde,
    SU,
    SV,
    QU,
    QV,
}

impl FactorId {
    pub const ALL: [FactorId; 6] = [Self::UTilde, Self::VTilde, Self::SU, Self::SV, Self::QU, Self::QV];

    pub fn name(self) -> &'static str {
        match self {
            Self::UTilde => "u_tilde",
            Self::VTilde => "v_tilde",
            Self::SU => "s_u",
            Self::SV => "s_v",
            Self::QU => "q_u",
            Self::QV => "q_v",
        }
    }

    fn index(self) -> usize {
        Self::ALL.iter().position(|&f| f == self).expect("listed")
    }
}

/// `(f(A + hE_ij) − f(A − hE_ij)) / 2h` for every entry of `at`.
pub fn central_difference<F>(mut f: F, at: &DMatrix<f64>, h: f64) -> DMatrix<f64>
where
    F: FnMut(&DMatrix<f64>) -> f64,
{
    assert!(h > 0.0, "finite-difference step must be positive, got {h}");
    let mut probe = at.clone();
    DMatrix::from_fn(at.nrows(), at.ncols(), |i, j| {
        let orig = probe[(i, j)];
        probe[(i, j)] = orig + h;
        let plus = f(&probe);
        probe[(i, j)] = orig - h;
        let minus = f(&probe);
        probe[(i, j)] = orig;
        (plus - minus) / (2.0 * h)
    })
}

/// Central differences of `objective` with respect to the raw entries of one factor; the
/// manifold constraints are deliberately ignored.
pub fn finite_diff_gradient<F>(objective: F, raw: &RawFactors<f64>, factor: FactorId, h: f64) -> DMatrix<f64>
where
    F: Fn(&RawFactors<f64>) -> f64,
{
    let at = raw.as_array()[factor.index()].clone();
    let mut scratch = raw.clone();
    central_difference(
        |m| {
            *scratch.as_array_mut()[factor.index()] = m.clone();
            objective(&scratch)
        },
        &at,
        h,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FdReport {
    /// Relative error per factor, in [`FactorId::ALL`] order.
    pub errors: [f64; 6],
    pub h: f64,
    pub fingerprint: u64,
}

impl FdReport {
    pub fn max_error(&self) -> f64 {
        self.errors.iter().copied().fold(0.0, f64::max)
    }

    pub fn error(&self, factor: FactorId) -> f64 {
        self.errors[factor.index()]
    }
}

/// FNV-1a over the bit patterns of all factor entries and `j`.
pub fn state_fingerprint(state: &RsgState<f64>) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut hash = OFFSET;
    let mut feed = |bytes: [u8; 8]| {
        for b in bytes {
            hash ^= u64::from(b);
            hash = hash.wrapping_mul(PRIME);
        }
    };
    for m in state.raw().as_array() {
        for v in m.iter() {
            feed(v.to_bits().to_le_bytes());
        }
    }
    feed(state.j.to_le_bytes());
    hash
}

/// `‖G_fd − G‖_F / max(‖G_fd‖_F, ‖G‖_F, 1e-12)` for each factor, comparing `analytic`
/// against central differences of `F̃` at `state`.
pub fn compare_gradients(state: &RsgState<f64>, c_xy: &DMatrix<f64>, h: f64, analytic: &RawFactors<f64>) -> FdReport {
    let raw = state.raw();
    let objective = |r: &RawFactors<f64>| r.f_tilde(c_xy);
    let mut errors = [0.0; 6];
    for factor in FactorId::ALL {
        let numeric = finite_diff_gradient(objective, &raw, factor, h);
        let exact = analytic.as_array()[factor.index()];
        let scale = numeric.norm().max(exact.norm()).max(1e-12);
        errors[factor.index()] = (&numeric - exact).norm() / scale;
    }
    FdReport {
        errors,
        h,
        fingerprint: state_fingerprint(state),
    }
}

/// A generic random state and cross-covariance for gradient checks: Gaussian `Ũ, Ṽ`
/// orthonormalized, `S = I + 0.3·upper(G)`, `Q = expm(skew(G))`, `C` Gaussian.
pub fn random_probe(d_x: usize, d_y: usize, k: usize, seed: u64) -> crate::Result<(RsgState<f64>, DMatrix<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gaussian = |r: usize, c: usize| DMatrix::from_fn(r, c, |_, _| rng.sample::<f64, _>(StandardNormal));
    let u = orthonormalize(&gaussian(d_x, k))?;
    let v = orthonormalize(&gaussian(d_y, k))?;
    let mut state = RsgState::with_bases(u, v)?;
    let eye = DMatrix::<f64>::identity(k, k);
    state.s_u = upper_project(&(&eye + gaussian(k, k) * 0.3));
    state.s_v = upper_project(&(&eye + gaussian(k, k) * 0.3));
    let skew = |g: DMatrix<f64>| (&g - g.transpose()) * 0.5;
    state.q_u = SoPoint::new(matrix_exp_small(&skew(gaussian(k, k)))?)?;
    state.q_v = SoPoint::new(matrix_exp_small(&skew(gaussian(k, k)))?)?;
    let c_xy = gaussian(d_x, d_y);
    Ok((state, c_xy))
}

/// Finite-difference check of all six Euclidean CCA gradients.
pub fn check_gradients(state: &RsgState<f64>, c_xy: &DMatrix<f64>, h: f64) -> crate::Result<FdReport> {
    let analytic = cca_euclidean_gradients(state, c_xy)?;
    Ok(compare_gradients(state, c_xy, h, &analytic))
}
