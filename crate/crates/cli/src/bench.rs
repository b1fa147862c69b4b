use std::io::Write;
use std::time::Instant;

use cca_core::rsg::{init_state, step, Hyperparams, RsgState};
use cca_core::stream::{gen_synthetic, SyntheticGaussianSpec};

use crate::CliError;

pub const BENCH_BATCH: usize = 100;
const WARMUP: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchRow {
    pub d: usize,
    pub median_step_ms: f64,
    /// Median relative to the previous dimension; `None` for the first.
    pub ratio_vs_prev: Option<f64>,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Median wall time of one optimizer step (d_x = d_y = d, batch of 100) per dimension.
pub fn bench(
    dims: &[usize],
    k: usize,
    batches: usize,
    seed: u64,
    out: &mut dyn Write,
) -> Result<Vec<BenchRow>, CliError> {
    if dims.is_empty() || batches == 0 {
        return Err(CliError::Config(
            "bench needs at least one dimension and one batch".into(),
        ));
    }
    if let Some(&d) = dims.iter().find(|&&d| k == 0 || k > d) {
        return Err(CliError::Config(format!("k = {k} must be in 1..={d}")));
    }
    let mut hyper = Hyperparams::new(k);
    hyper.batch_size = BENCH_BATCH;
    hyper.seed = seed;

    writeln!(out, "d,median_step_ms,ratio_vs_prev")?;
    let mut rows: Vec<BenchRow> = Vec::new();
    for &d in dims {
        let spec = SyntheticGaussianSpec::<f64>::planted(d, d, &[4.0, 3.0, 2.0, 1.5][..k.min(4)], 0.5, seed)
            .map_err(|e| CliError::Config(e.to_string()))?;
        let data = gen_synthetic(&spec, (batches + WARMUP) * BENCH_BATCH, BENCH_BATCH)
            .map_err(|e| CliError::Config(e.to_string()))?
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::data("bench data", e))?;
        let mut state: RsgState<f64> = init_state(d, d, k, seed).map_err(|e| CliError::Config(e.to_string()))?;
        let mut times = Vec::with_capacity(batches);
        for (i, batch) in data.iter().enumerate() {
            let t0 = Instant::now();
            state = step(&state, &batch.x, &batch.y, &hyper)
                .map_err(|e| CliError::data(format!("bench step at d = {d}"), e))?;
            let ms = t0.elapsed().as_secs_f64() * 1e3;
            if i >= WARMUP {
                times.push(ms);
            }
        }
        let median_step_ms = median(times);
        let ratio_vs_prev = rows.last().map(|p| median_step_ms / p.median_step_ms);
        let ratio = ratio_vs_prev.map_or_else(String::new, |r| format!("{r:.3}"));
        writeln!(out, "{d},{median_step_ms:.4},{ratio}")?;
        rows.push(BenchRow {
            d,
            median_step_ms,
            ratio_vs_prev,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
