//! Independent oracles: central finite differences for the Euclidean gradients, a
//! separately coded brute-force CCA, and the approximation/PCA-bound diagnostic report.
//!
//! Nothing here calls the library code paths it is used to check.

mod brute;
mod diagnostics;
mod fd;

pub use brute::{brute_force_cca, jacobi_eigen, BRUTE_MAX_DIM, BRUTE_MAX_ROWS};
pub use diagnostics::{run_diagnostics, DiagnosticReport};
pub use fd::{
    central_difference, check_gradients, compare_gradients, finite_diff_gradient, random_probe, state_fingerprint,
    FactorId, FdReport, DEFAULT_FD_STEP,
};
