use std::io::Write;

use cca_core::oracles::{check_gradients, compare_gradients, random_probe, FactorId, FdReport, DEFAULT_FD_STEP};
use cca_core::rsg::cca_euclidean_gradients;

use crate::CliError;

/// Largest relative finite-difference error accepted for any factor.
pub const GRADIENT_TOLERANCE: f64 = 1e-5;
pub const PROBE_DIM: usize = 12;
pub const PROBE_K: usize = 3;

/// Finite-difference check of the analytic gradients at `trials` random states.
///
/// `corrupt` perturbs one analytic entry so that the failure path can be exercised.
pub fn check(seed: u64, trials: usize, corrupt: bool, out: &mut dyn Write) -> Result<Vec<FdReport>, CliError> {
    if trials == 0 {
        return Err(CliError::Config("--trials must be at least 1".into()));
    }
    let names: Vec<&str> = FactorId::ALL.iter().map(|f| f.name()).collect();
    writeln!(out, "trial,seed,{}", names.join(","))?;
    let mut reports = Vec::with_capacity(trials);
    let mut worst = 0.0f64;
    for t in 0..trials {
        let s = seed + t as u64;
        let (state, c_xy) =
            random_probe(PROBE_DIM, PROBE_DIM, PROBE_K, s).map_err(|e| CliError::Config(e.to_string()))?;
        let report = if corrupt {
            let mut analytic = cca_euclidean_gradients(&state, &c_xy).map_err(|e| CliError::Config(e.to_string()))?;
            analytic.s_u[(0, 0)] += 1e-3 * (1.0 + analytic.s_u[(0, 0)].abs());
            compare_gradients(&state, &c_xy, DEFAULT_FD_STEP, &analytic)
        } else {
            check_gradients(&state, &c_xy, DEFAULT_FD_STEP).map_err(|e| CliError::Config(e.to_string()))?
        };
        let cells: Vec<String> = report.errors.iter().map(|e| format!("{e:.3e}")).collect();
        writeln!(out, "{t},{s},{}", cells.join(","))?;
        worst = worst.max(report.max_error());
        reports.push(report);
    }
    writeln!(out, "max relative error {worst:.3e} (tolerance {GRADIENT_TOLERANCE:e})")?;
    if !(worst <= GRADIENT_TOLERANCE) {
        return Err(CliError::Validation(format!(
            "gradient check failed: max relative error {worst:e} exceeds {GRADIENT_TOLERANCE:e}"
        )));
    }
    Ok(reports)
}
