use nalgebra::{DMatrix, RowDVector};

use crate::cca::center_columns;
use crate::error::Result;
use crate::stream::ViewPairBatch;
use crate::Scalar;

/// Streaming mean removal: batch 1 is centered by its own mean, every later batch by the
/// mean of all earlier rows. The running mean is updated after each batch is emitted.
pub struct CenterOnline<T: Scalar, I> {
    source: I,
    sum_x: Option<RowDVector<T>>,
    sum_y: Option<RowDVector<T>>,
    count: usize,
}

impl<T: Scalar, I> CenterOnline<T, I> {
    pub fn new(source: I) -> Self {
        Self {
            source,
            sum_x: None,
            sum_y: None,
            count: 0,
        }
    }
}

fn column_sums<T: Scalar>(m: &DMatrix<T>) -> RowDVector<T> {
    m.row_sum()
}

fn subtract_row<T: Scalar>(m: &DMatrix<T>, mean: &RowDVector<T>) -> DMatrix<T> {
    let mut out = m.clone();
    for mut row in out.row_iter_mut() {
        row -= mean;
    }
    out
}

impl<T, I> Iterator for CenterOnline<T, I>
where
    T: Scalar,
    I: Iterator<Item = Result<ViewPairBatch<T>>>,
{
    type Item = Result<ViewPairBatch<T>>;

    fn next(&mut self) -> Option<Self::Item> {
        let batch = match self.source.next()? {
            Ok(b) => b,
            Err(e) => return Some(Err(e)),
        };
        let bx = column_sums(&batch.x);
        let by = column_sums(&batch.y);
        let rows = batch.rows();
        let (mean_x, mean_y) = match (&self.sum_x, &self.sum_y) {
            (Some(sx), Some(sy)) if self.count > 0 => {
                let n = T::from_usize(self.count).expect("count fits scalar");
                (sx / n, sy / n)
            }
            _ => {
                let n = T::from_usize(rows.max(1)).expect("count fits scalar");
                (&bx / n, &by / n)
            }
        };
        let centered = ViewPairBatch {
            x: subtract_row(&batch.x, &mean_x),
            y: subtract_row(&batch.y, &mean_y),
            index: batch.index,
        };
        self.sum_x = Some(self.sum_x.take().map_or(bx.clone(), |s| s + &bx));
        self.sum_y = Some(self.sum_y.take().map_or(by.clone(), |s| s + &by));
        self.count += rows;
        Some(Ok(centered))
    }
}

/// Exact (non-streaming) centering of both views.
pub fn center_two_pass<T: Scalar>(x: &DMatrix<T>, y: &DMatrix<T>) -> (DMatrix<T>, DMatrix<T>) {
    let mut xc = x.clone();
    let mut yc = y.clone();
    center_columns(&mut xc);
    center_columns(&mut yc);
    (xc, yc)
}
