mod common;

use cca_core::cca::{estimate_covariances, exact_cca, whitening_residual, PccEvaluator};
use cca_core::oracles::{brute_force_cca, run_diagnostics};
use cca_core::rsg::{Hyperparams, RsgState};
use cca_core::stream::{collect_views, gen_synthetic, CenterOnline, SyntheticGaussianSpec};
use cca_core::RsgOptimizerF64;
use common::hand_case;

#[test]
fn hand_case_correlations() {
    let (x, y) = hand_case();
    let cov = estimate_covariances(&x, &y, true).unwrap();
    let sol = exact_cca(&cov, 2, 0.0).unwrap();
    assert!((sol.correlations[0] - 0.9).abs() <= 1e-12);
    assert!((sol.correlations[1] - 0.3).abs() <= 1e-12);
    let brute = brute_force_cca(&x, &y, 2).unwrap();
    assert!((&brute.correlations - &sol.correlations).amax() <= 1e-12);
}

#[test]
fn noiseless_identity_case_gives_unit_correlations() {
    let a = nalgebra::DMatrix::<f64>::identity(3, 3);
    let spec = SyntheticGaussianSpec::new(a.clone(), a, 0.0, 4).unwrap();
    let (x, y) = collect_views(gen_synthetic(&spec, 500, 100).unwrap()).unwrap();
    let sol = exact_cca(&estimate_covariances(&x, &y, true).unwrap(), 3, 0.0).unwrap();
    assert!(
        sol.correlations.iter().all(|r| (r - 1.0).abs() <= 1e-6),
        "{:?}",
        sol.correlations
    );
}

#[test]
fn planted_correlations_match_closed_form() {
    let strengths = [3.0, 1.0];
    let spec = SyntheticGaussianSpec::<f64>::planted(6, 5, &strengths, 0.5, 5).unwrap();
    let sol = exact_cca(&spec.population_covariance().unwrap(), 2, 0.0).unwrap();
    for (rho, a) in sol.correlations.iter().zip(strengths) {
        let expected = a * a / (a * a + 0.25);
        assert!((rho - expected).abs() <= 1e-10, "{rho} vs {expected}");
    }
}

#[test]
fn short_streaming_run_converges() {
    let spec = SyntheticGaussianSpec::<f64>::planted(20, 20, &[4.0, 3.0, 2.0], 0.5, 8).unwrap();
    let (x, y) = collect_views(gen_synthetic(&spec, 20_000, 1_000).unwrap()).unwrap();
    let cov = estimate_covariances(&x, &y, true).unwrap();
    let exact = exact_cca(&cov, 2, 0.0).unwrap();
    let eval = PccEvaluator::new(x.clone(), y.clone(), &exact).unwrap();

    let mut opt = RsgOptimizerF64::init(20, 20, Hyperparams::new(2)).unwrap();
    let batches = (0..200)
        .map(|i| cca_core::ViewPairBatch::new(x.rows(100 * i, 100).into_owned(), y.rows(100 * i, 100).into_owned(), i));
    for batch in CenterOnline::new(batches) {
        opt.consume(&batch.unwrap()).unwrap();
    }
    let state: &RsgState<f64> = opt.state();
    state.feasibility().check().unwrap();
    let (u, v) = state.extract_solution();
    let score = eval.score(&u, &v).unwrap();
    assert!(score >= 0.95, "pcc {score}");
    assert!(whitening_residual(&u, &cov.c_x) <= 0.1);

    let report = run_diagnostics(state, &cov, &exact, opt.max_update_norm()).unwrap();
    assert!(report.e.is_finite() && report.e >= 0.0);
}

#[test]
fn diagnostics_at_exact_solution() {
    let spec = SyntheticGaussianSpec::<f64>::planted(6, 6, &[3.0, 2.0], 0.5, 6).unwrap();
    let (x, y) = collect_views(gen_synthetic(&spec, 3_000, 1_000).unwrap()).unwrap();
    let cov = estimate_covariances(&x, &y, true).unwrap();
    let exact = exact_cca(&cov, 2, 0.0).unwrap();
    let state = RsgState::from_directions(&exact.u_star, &exact.v_star).unwrap();
    let report = run_diagnostics(&state, &cov, &exact, 0.0).unwrap();
    assert!(report.e <= 1e-8, "{report:?}");
    assert!(report.whitening_u <= 1e-6 && report.whitening_v <= 1e-6);
    let json = serde_json::to_value(report).unwrap();
    assert!(json.get("E").is_some());
}
