//! Streaming canonical correlation analysis.
//!
//! The canonical directions are factored as `U = Ũ S_u Q_u`, `V = Ṽ S_v Q_v` with
//! `Ũ, Ṽ` on Stiefel manifolds, `S_u, S_v` upper triangular and `Q_u, Q_v` in
//! SO(k), and optimized with Riemannian stochastic gradient steps over a stream of
//! mini-batches. An exact SVD-based solver, data sources and brute-force
//! validation oracles live alongside the optimizer.
//!
//! All math is generic over [`Scalar`] (`f32` or `f64`); the `*F64` aliases below
//! are what the experiment harness uses.

// Negated comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cca;
pub mod error;
pub mod manifold;
pub mod oracles;
pub mod rsg;
pub mod scalar;
pub mod stream;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use cca::{CcaSolution, CovarianceTriple};
pub use manifold::{GrassmannPoint, ManifoldKind, SoPoint, StiefelPoint, TangentVector, UpperTriangular};
pub use rsg::{GradientBundle, Hyperparams, RsgOptimizer, RsgState};
pub use stream::ViewPairBatch;

pub type StiefelPointF64 = StiefelPoint<f64>;
pub type GrassmannPointF64 = GrassmannPoint<f64>;
pub type SoPointF64 = SoPoint<f64>;
pub type UpperTriangularF64 = UpperTriangular<f64>;
pub type TangentVectorF64 = TangentVector<f64>;
pub type CovarianceTripleF64 = CovarianceTriple<f64>;
pub type CcaSolutionF64 = CcaSolution<f64>;
pub type RsgStateF64 = RsgState<f64>;
pub type RsgOptimizerF64 = RsgOptimizer<f64>;
pub type ViewPairBatchF64 = ViewPairBatch<f64>;

pub type StiefelPointF32 = StiefelPoint<f32>;
pub type SoPointF32 = SoPoint<f32>;
pub type RsgStateF32 = RsgState<f32>;
