//! Riemannian stochastic gradient optimizer for the factored CCA objective.
//!
//! The state holds `Ũ, Ṽ` (Stiefel), `S_u, S_v` (upper triangular) and `Q_u, Q_v`
//! (SO(k)); the canonical directions are `U = Ũ S_u Q_u`, `V = Ṽ S_v Q_v`. Each step
//! forms a Grassmann-average PCA gradient and projected CCA gradients from one
//! mini-batch and moves every factor along its manifold's exponential map.
//!
//! All stored gradients are gradients of the loss `L = −F̃_tot`, and updates follow
//! `Exp(−γ ∇L)`.

mod checkpoint;
mod gradients;
mod hyper;
mod optimizer;
mod state;

pub use checkpoint::{read_checkpoint, write_checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use gradients::{cca_euclidean_gradients, combine, pca_gradient, riemannian_project, GradientBundle, PcaGradient};
pub use hyper::{CrossCovariance, Hyperparams, PcaLog, Schedule, Whitening};
pub use optimizer::{restore_whitening, step, step_detailed, update, RsgOptimizer, StepReport};
pub use state::{init_state, Feasibility, Objective, RawFactors, RsgState};
