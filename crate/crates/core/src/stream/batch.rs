use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::Scalar;

/// The j-th mini-batch of paired samples (rows of `x` and `y` correspond).
#[derive(Debug, Clone, PartialEq)]
pub struct ViewPairBatch<T: Scalar> {
    pub x: DMatrix<T>,
    pub y: DMatrix<T>,
    pub index: usize,
}

impl<T: Scalar> ViewPairBatch<T> {
    pub fn new(x: DMatrix<T>, y: DMatrix<T>, index: usize) -> Result<Self> {
        if x.nrows() != y.nrows() {
            return Err(Error::RowCountMismatch {
                x_rows: x.nrows(),
                y_rows: y.nrows(),
            });
        }
        if let Some(pos) = x.iter().chain(y.iter()).position(|v| !v.is_finite()) {
            return Err(Error::InsufficientData(format!(
                "batch {index} has a non-finite entry (flat position {pos})"
            )));
        }
        Ok(Self { x, y, index })
    }

    pub fn rows(&self) -> usize {
        self.x.nrows()
    }
}

/// Stacks a stream into full `(X, Y)` matrices.
pub fn collect_views<T, I>(source: I) -> Result<(DMatrix<T>, DMatrix<T>)>
where
    T: Scalar,
    I: IntoIterator<Item = Result<ViewPairBatch<T>>>,
{
    let batches = source.into_iter().collect::<Result<Vec<_>>>()?;
    let Some(first) = batches.first() else {
        return Err(Error::InsufficientData("empty stream".into()));
    };
    let (dx, dy) = (first.x.ncols(), first.y.ncols());
    let n: usize = batches.iter().map(ViewPairBatch::rows).sum();
    let mut x = DMatrix::zeros(n, dx);
    let mut y = DMatrix::zeros(n, dy);
    let mut row = 0;
    for b in &batches {
        if b.x.ncols() != dx || b.y.ncols() != dy {
            return Err(Error::Dimension(format!("batch {} changes view widths", b.index)));
        }
        x.rows_mut(row, b.rows()).copy_from(&b.x);
        y.rows_mut(row, b.rows()).copy_from(&b.y);
        row += b.rows();
    }
    Ok((x, y))
}
