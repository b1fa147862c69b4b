//! Batch covariance estimation, the closed-form CCA solution, and the TCC/PCC
//! evaluation metrics. This is the ground truth the streaming solver is scored against.

mod bounds;
mod covariance;
mod exact;
mod metrics;

pub use bounds::{approximation_error_diagnostic, pca_reconstruction_bound, ApproximationError, EIGENGAP_TOLERANCE};
pub use covariance::{center_columns, estimate_covariances, CovarianceTriple};
pub use exact::{exact_cca, CcaSolution, EIGEN_FLOOR};
pub use metrics::{pcc, tcc, whitening_residual, PccEvaluator};
