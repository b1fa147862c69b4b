use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Lines, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::stream::ViewPairBatch;
use crate::Scalar;

/// Row reader over a comma-separated file; yields row-blocks of up to `batch` rows.
pub struct DelimitedRows<T: Scalar> {
    lines: Lines<BufReader<File>>,
    batch: usize,
    /// 1-based number of the next data row.
    row: usize,
    width: Option<usize>,
    done: bool,
    _scalar: std::marker::PhantomData<T>,
}

impl<T: Scalar> DelimitedRows<T> {
    pub fn open(path: &Path, batch: usize, skip_header: bool) -> Result<Self> {
        if batch == 0 {
            return Err(Error::Dimension("batch size must be positive".into()));
        }
        let mut lines = BufReader::new(File::open(path)?).lines();
        if skip_header {
            lines.next().transpose()?;
        }
        Ok(Self {
            lines,
            batch,
            row: 1,
            width: None,
            done: false,
            _scalar: std::marker::PhantomData,
        })
    }

    fn parse_line(&mut self, line: &str) -> Result<Vec<T>> {
        let row = self.row;
        let values = line
            .split(',')
            .enumerate()
            .map(|(i, field)| {
                field.trim().parse::<f64>().map(T::lit).map_err(|e| Error::Parse {
                    row,
                    column: i + 1,
                    message: format!("{e} ({:?})", field.trim()),
                })
            })
            .collect::<Result<Vec<T>>>()?;
        match self.width {
            None => self.width = Some(values.len()),
            Some(w) if w != values.len() => {
                return Err(Error::Parse {
                    row,
                    column: values.len().min(w) + 1,
                    message: format!("expected {w} fields, found {}", values.len()),
                })
            }
            Some(_) => {}
        }
        Ok(values)
    }

    fn next_block(&mut self) -> Result<Option<DMatrix<T>>> {
        let mut data: Vec<T> = Vec::new();
        let mut rows = 0;
        while rows < self.batch {
            let Some(line) = self.lines.next().transpose()? else {
                break;
            };
            if line.trim().is_empty() {
                // Blank lines (typically a trailing newline) are not samples.
                continue;
            }
            let values = self.parse_line(&line)?;
            data.extend(values);
            rows += 1;
            self.row += 1;
        }
        if rows == 0 {
            return Ok(None);
        }
        let width = self.width.unwrap_or(0);
        Ok(Some(DMatrix::from_row_slice(rows, width, &data)))
    }
}

impl<T: Scalar> Iterator for DelimitedRows<T> {
    type Item = Result<DMatrix<T>>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        match self.next_block() {
            Ok(Some(m)) => Some(Ok(m)),
            Ok(None) => {
                self.done = true;
                None
            }
            Err(e) => {
                self.done = true;
                Some(Err(e))
            }
        }
    }
}

/// Reads a whole comma-separated file into a matrix.
pub fn load_delimited<T: Scalar>(path: &Path, skip_header: bool) -> Result<DMatrix<T>> {
    let blocks = DelimitedRows::<T>::open(path, 4096, skip_header)?.collect::<Result<Vec<_>>>()?;
    let Some(first) = blocks.first() else {
        return Ok(DMatrix::zeros(0, 0));
    };
    let n = blocks.iter().map(|b| b.nrows()).sum();
    let mut m = DMatrix::zeros(n, first.ncols());
    let mut at = 0;
    for b in &blocks {
        m.rows_mut(at, b.nrows()).copy_from(b);
        at += b.nrows();
    }
    Ok(m)
}

/// Streams two row-aligned files as view pairs, `batch` rows at a time.
pub fn load_delimited_pair<T: Scalar>(
    path_x: &Path,
    path_y: &Path,
    batch: usize,
    skip_header: bool,
) -> Result<DelimitedPairStream<T>> {
    Ok(DelimitedPairStream {
        x: DelimitedRows::open(path_x, batch, skip_header)?,
        y: DelimitedRows::open(path_y, batch, skip_header)?,
        rows_seen: 0,
        index: 0,
        done: false,
    })
}

pub struct DelimitedPairStream<T: Scalar> {
    x: DelimitedRows<T>,
    y: DelimitedRows<T>,
    rows_seen: usize,
    index: usize,
    done: bool,
}

impl<T: Scalar> Iterator for DelimitedPairStream<T> {
    type Item = Result<ViewPairBatch<T>>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let item = match (self.x.next().transpose(), self.y.next().transpose()) {
            (Err(e), _) | (_, Err(e)) => Err(e),
            (Ok(None), Ok(None)) => {
                self.done = true;
                return None;
            }
            (Ok(Some(x)), Ok(Some(y))) if x.nrows() == y.nrows() => {
                self.rows_seen += x.nrows();
                let b = ViewPairBatch::new(x, y, self.index);
                self.index += 1;
                b
            }
            (x, y) => {
                let count = |m: Option<DMatrix<T>>| m.map_or(0, |m| m.nrows());
                Err(Error::RowCountMismatch {
                    x_rows: self.rows_seen + count(x.ok().flatten()),
                    y_rows: self.rows_seen + count(y.ok().flatten()),
                })
            }
        };
        if item.is_err() {
            self.done = true;
        }
        Some(item)
    }
}

/// Writes `m` as comma-separated rows with 17 significant digits, enough to reload
/// every `f64` bit-exactly.
pub fn write_delimited<T: Scalar>(path: &Path, m: &DMatrix<T>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            if c > 0 {
                out.write_all(b",")?;
            }
            write!(out, "{:.16e}", m[(r, c)].to_f64_lossy())?;
        }
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}
