use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::stream::ViewPairBatch;
use crate::Scalar;

/// Splits single-view row blocks at column `c`: `[0, c)` becomes `x`, `[c, d)` becomes `y`.
pub fn split_views<T, I>(source: I, split_column: usize) -> SplitViews<I>
where
    T: Scalar,
    I: Iterator<Item = Result<DMatrix<T>>>,
{
    SplitViews {
        source,
        split_column,
        index: 0,
        failed: false,
    }
}

pub struct SplitViews<I> {
    source: I,
    split_column: usize,
    index: usize,
    failed: bool,
}

impl<T, I> Iterator for SplitViews<I>
where
    T: Scalar,
    I: Iterator<Item = Result<DMatrix<T>>>,
{
    type Item = Result<ViewPairBatch<T>>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        let rows = match self.source.next()? {
            Ok(m) => m,
            Err(e) => {
                self.failed = true;
                return Some(Err(e));
            }
        };
        let (c, d) = (self.split_column, rows.ncols());
        if c == 0 || c >= d {
            self.failed = true;
            return Some(Err(Error::Dimension(format!("split column {c} must be in 1..{d}"))));
        }
        let x = rows.columns(0, c).into_owned();
        let y = rows.columns(c, d - c).into_owned();
        let batch = ViewPairBatch::new(x, y, self.index);
        self.index += 1;
        Some(batch)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_row() {
        let m = DMatrix::from_row_slice(1, 4, &[1.0, 2.0, 3.0, 4.0]);
        let b = split_views(std::iter::once(Ok(m)), 2).next().unwrap().unwrap();
        assert_eq!(b.x, DMatrix::from_row_slice(1, 2, &[1.0, 2.0]));
        assert_eq!(b.y, DMatrix::from_row_slice(1, 2, &[3.0, 4.0]));
    }

    #[test]
    fn edge_and_invalid_columns() {
        let m = DMatrix::<f64>::zeros(5, 4);
        let b = split_views(std::iter::once(Ok(m.clone())), 3).next().unwrap().unwrap();
        assert_eq!((b.x.shape(), b.y.shape()), ((5, 3), (5, 1)));
        for c in [0, 4, 9] {
            let r = split_views(std::iter::once(Ok(m.clone())), c).next().unwrap();
            assert!(matches!(r, Err(Error::Dimension(_))));
        }
    }
}
