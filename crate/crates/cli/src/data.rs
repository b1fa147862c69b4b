use nalgebra::DMatrix;

use cca_core::stream::{
    collect_views, gen_synthetic, load_delimited, load_delimited_pair, split_views, DelimitedRows,
    SyntheticGaussianSpec,
};

use crate::{CliError, SourceSpec};

const LOAD_BLOCK: usize = 4096;

/// Materializes both views of a source, uncentered.
pub fn load_dataset(source: &SourceSpec) -> Result<(DMatrix<f64>, DMatrix<f64>), CliError> {
    match source {
        SourceSpec::Synthetic {
            d_x,
            d_y,
            strengths,
            noise_scale,
            n,
            data_seed,
            ..
        } => {
            let spec = SyntheticGaussianSpec::<f64>::planted(*d_x, *d_y, strengths, *noise_scale, *data_seed)
                .map_err(|e| CliError::Config(e.to_string()))?;
            let stream = gen_synthetic(&spec, *n, LOAD_BLOCK).map_err(|e| CliError::Config(e.to_string()))?;
            collect_views(stream).map_err(|e| CliError::data("synthetic source", e))
        }
        SourceSpec::Files {
            path_x,
            path_y,
            skip_header,
        } => {
            let pair = load_delimited_pair::<f64>(path_x, path_y, LOAD_BLOCK, *skip_header)
                .map_err(|e| CliError::data(path_x.display(), e))?;
            let (x, y) = collect_views(pair)
                .map_err(|e| CliError::data(format!("{} / {}", path_x.display(), path_y.display()), e))?;
            if x.ncols() == 0 || y.ncols() == 0 {
                return Err(CliError::Data(format!("{}: no columns", path_x.display())));
            }
            Ok((x, y))
        }
        SourceSpec::Split {
            path,
            split_column,
            skip_header,
        } => {
            let rows = DelimitedRows::<f64>::open(path, LOAD_BLOCK, *skip_header)
                .map_err(|e| CliError::data(path.display(), e))?;
            collect_views(split_views(rows, *split_column)).map_err(|e| CliError::data(path.display(), e))
        }
    }
}

/// Single-file loader used by `exact` for one view.
pub fn load_matrix(path: &std::path::Path, skip_header: bool) -> Result<DMatrix<f64>, CliError> {
    load_delimited(path, skip_header).map_err(|e| CliError::data(path.display(), e))
}
