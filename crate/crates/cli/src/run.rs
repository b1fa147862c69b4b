use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::time::Instant;

use cca_core::cca::{estimate_covariances, exact_cca, whitening_residual, CovarianceTriple, PccEvaluator};
use cca_core::oracles::{run_diagnostics, DiagnosticReport};
use cca_core::rsg::RsgOptimizer;
use cca_core::stream::{CenterOnline, ViewPairBatch};
use nalgebra::DMatrix;
use serde::Serialize;

use crate::data::load_dataset;
use crate::{fmt_float, CliError, RunConfig};

pub const RESULTS_HEADER: &str = "samples_seen,pcc,f_tilde,f_pca,whitening_u,whitening_v,elapsed_s";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalRow {
    pub samples_seen: usize,
    pub pcc: f64,
    pub f_tilde: f64,
    pub f_pca: f64,
    pub whitening_u: f64,
    pub whitening_v: f64,
    pub elapsed_s: f64,
}

impl EvalRow {
    fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.samples_seen,
            fmt_float(self.pcc),
            fmt_float(self.f_tilde),
            fmt_float(self.f_pca),
            fmt_float(self.whitening_u),
            fmt_float(self.whitening_v),
            fmt_float(self.elapsed_s)
        )
    }
}

#[derive(Debug, Clone, Serialize)]
struct Summary<'a> {
    final_pcc: f64,
    total_time_s: f64,
    steps: u64,
    skipped_blocks: usize,
    ball_violations: usize,
    config: &'a RunConfig,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub rows: Vec<EvalRow>,
    pub final_pcc: f64,
    pub steps: u64,
    pub total_time_s: f64,
    pub diagnostics: DiagnosticReport,
    pub output_dir: PathBuf,
}

/// Mini-batches of the materialized data; a trailing partial batch is dropped.
fn batches<'a>(
    x: &'a DMatrix<f64>,
    y: &'a DMatrix<f64>,
    b: usize,
    passes: usize,
) -> impl Iterator<Item = cca_core::Result<ViewPairBatch<f64>>> + 'a {
    let per_pass = x.nrows() / b;
    (0..passes * per_pass).map(move |i| {
        let start = (i % per_pass) * b;
        ViewPairBatch::new(x.rows(start, b).into_owned(), y.rows(start, b).into_owned(), i)
    })
}

struct Evaluator<'a> {
    pcc: PccEvaluator<f64>,
    cov: &'a CovarianceTriple<f64>,
}

impl Evaluator<'_> {
    fn row(&self, opt: &RsgOptimizer<f64>, samples_seen: usize, start: Instant) -> Result<EvalRow, CliError> {
        let state = opt.state();
        let (u, v) = state.extract_solution();
        let pcc = self.pcc.score(&u, &v).map_err(|e| CliError::data("evaluation", e))?;
        let obj = state.objective(self.cov).map_err(|e| CliError::data("evaluation", e))?;
        Ok(EvalRow {
            samples_seen,
            pcc,
            f_tilde: obj.f_tilde,
            f_pca: obj.f_pca,
            whitening_u: whitening_residual(&u, &self.cov.c_x),
            whitening_v: whitening_residual(&v, &self.cov.c_y),
            elapsed_s: start.elapsed().as_secs_f64(),
        })
    }
}

/// Trains on the configured stream, evaluating against the exact solution of the full data,
/// and writes `results.csv`, `summary.json` and `diagnostics.json` into the output directory.
pub fn run(config: &RunConfig) -> Result<RunOutcome, CliError> {
    let (x, y) = load_dataset(&config.source)?;
    let hyper = config.hyper.clone();
    let (n, dx, dy) = (x.nrows(), x.ncols(), y.ncols());
    if hyper.k > dx.min(dy) {
        return Err(CliError::Config(format!(
            "k = {} exceeds min(d_x, d_y) = {}",
            hyper.k,
            dx.min(dy)
        )));
    }
    if n < hyper.batch_size {
        return Err(CliError::Data(format!(
            "{n} rows is fewer than one batch of {}",
            hyper.batch_size
        )));
    }
    let cov = estimate_covariances(&x, &y, config.center).map_err(|e| CliError::data("covariance", e))?;
    let exact = exact_cca(&cov, hyper.k, config.ridge).map_err(|e| CliError::data("exact oracle", e))?;
    let evaluator = Evaluator {
        pcc: PccEvaluator::new(x.clone(), y.clone(), &exact).map_err(|e| CliError::data("exact oracle", e))?,
        cov: &cov,
    };
    log::info!(
        "n = {n}, d_x = {dx}, d_y = {dy}, k = {}, exact correlations {:?}",
        hyper.k,
        exact.correlations.as_slice()
    );

    std::fs::create_dir_all(&config.output_dir).map_err(|e| CliError::data(config.output_dir.display(), e))?;
    let results_path = config.output_dir.join("results.csv");
    let mut out = BufWriter::new(File::create(&results_path).map_err(|e| CliError::data(results_path.display(), e))?);
    writeln!(out, "{RESULTS_HEADER}")?;

    let start = Instant::now();
    let mut opt = RsgOptimizer::<f64>::init(dx, dy, hyper.clone()).map_err(|e| CliError::Config(e.to_string()))?;
    let b = hyper.batch_size;
    let total_steps = config.passes * (n / b);
    let mut rows = vec![evaluator.row(&opt, 0, start)?];
    writeln!(out, "{}", rows[0].csv())?;

    let source: Box<dyn Iterator<Item = cca_core::Result<ViewPairBatch<f64>>>> = if config.center {
        Box::new(CenterOnline::new(batches(&x, &y, b, config.passes)))
    } else {
        Box::new(batches(&x, &y, b, config.passes))
    };
    for (i, batch) in source.enumerate() {
        let batch = batch.map_err(|e| CliError::data(format!("batch {i}"), e))?;
        opt.consume(&batch)
            .map_err(|e| CliError::data(format!("step {i}"), e))?;
        let steps = i + 1;
        if steps % config.eval_every == 0 || steps == total_steps {
            let row = evaluator.row(&opt, steps * b, start)?;
            log::debug!("step {steps}: pcc {:.6}", row.pcc);
            writeln!(out, "{}", row.csv())?;
            rows.push(row);
        }
    }
    out.flush()?;
    let total_time_s = start.elapsed().as_secs_f64();

    let final_pcc = rows.last().map_or(f64::NAN, |r| r.pcc);
    let steps = opt.state().j;
    let diagnostics = run_diagnostics(opt.state(), &cov, &exact, opt.max_update_norm())
        .map_err(|e| CliError::data("diagnostics", e))?;
    write_json(&config.output_dir.join("diagnostics.json"), &diagnostics)?;
    write_json(
        &config.output_dir.join("summary.json"),
        &Summary {
            final_pcc,
            total_time_s,
            steps,
            skipped_blocks: opt.skipped_blocks(),
            ball_violations: opt.ball_violations(),
            config,
        },
    )?;
    log::info!("{steps} steps in {total_time_s:.2}s, final pcc {final_pcc:.6}");
    Ok(RunOutcome {
        rows,
        final_pcc,
        steps,
        total_time_s,
        diagnostics,
        output_dir: config.output_dir.clone(),
    })
}

fn write_json<S: Serialize>(path: &std::path::Path, value: &S) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::data(path.display(), e))?;
    std::fs::write(path, text + "\n").map_err(|e| CliError::data(path.display(), e))
}
