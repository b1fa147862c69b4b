use std::io::Write;

use cca_core::cca::{estimate_covariances, exact_cca, CcaSolution};
use cca_core::oracles::{brute_force_cca, BRUTE_MAX_DIM, BRUTE_MAX_ROWS};
use cca_core::stream::write_matrix_cache;

use crate::data::load_dataset;
use crate::{fmt_float, CliError, RunConfig};

/// Agreement required between the closed form and the brute-force oracle.
pub const BRUTE_TOLERANCE: f64 = 1e-8;

/// Closed-form CCA of the configured data. Writes `u_star.ccam`, `v_star.ccam` and
/// `correlations.csv` to the output directory and prints the correlations to `out`.
pub fn exact(config: &RunConfig, brute_check: bool, out: &mut dyn Write) -> Result<CcaSolution<f64>, CliError> {
    let (x, y) = load_dataset(&config.source)?;
    let k = config.hyper.k;
    if k > x.ncols().min(y.ncols()) {
        return Err(CliError::Config(format!(
            "k = {k} exceeds min(d_x, d_y) = {}",
            x.ncols().min(y.ncols())
        )));
    }
    let cov = estimate_covariances(&x, &y, config.center).map_err(|e| CliError::data("covariance", e))?;
    let sol = exact_cca(&cov, k, config.ridge).map_err(|e| CliError::data("exact oracle", e))?;
    for (i, rho) in sol.correlations.iter().enumerate() {
        writeln!(out, "rho_{} = {}", i + 1, fmt_float(*rho))?;
    }

    let dir = &config.output_dir;
    std::fs::create_dir_all(dir).map_err(|e| CliError::data(dir.display(), e))?;
    write_matrix_cache(&dir.join("u_star.ccam"), &sol.u_star).map_err(|e| CliError::data("u_star.ccam", e))?;
    write_matrix_cache(&dir.join("v_star.ccam"), &sol.v_star).map_err(|e| CliError::data("v_star.ccam", e))?;
    let mut csv = String::from("component,correlation\n");
    for (i, rho) in sol.correlations.iter().enumerate() {
        csv.push_str(&format!("{},{}\n", i + 1, fmt_float(*rho)));
    }
    std::fs::write(dir.join("correlations.csv"), csv)?;

    if brute_check {
        if x.ncols().max(y.ncols()) > BRUTE_MAX_DIM || x.nrows() > BRUTE_MAX_ROWS {
            return Err(CliError::Config(format!(
                "brute-force check is limited to d <= {BRUTE_MAX_DIM} and n <= {BRUTE_MAX_ROWS}"
            )));
        }
        if !config.center || config.ridge != 0.0 {
            return Err(CliError::Config(
                "brute-force check needs center = true and ridge = 0".into(),
            ));
        }
        let brute = brute_force_cca(&x, &y, k).map_err(|e| CliError::data("brute-force oracle", e))?;
        let diff = (&brute.correlations - &sol.correlations).amax();
        writeln!(out, "brute-force max |delta rho| = {diff:e}")?;
        if !(diff <= BRUTE_TOLERANCE) {
            return Err(CliError::Validation(format!(
                "closed form and brute force disagree by {diff:e} (tolerance {BRUTE_TOLERANCE:e})"
            )));
        }
    }
    Ok(sol)
}
