use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::Scalar;

pub const MATRIX_CACHE_MAGIC: &[u8; 4] = b"CCAM";

/// Writes `m` as `CCAM`, rows u64, cols u64, then row-major little-endian f64 values.
pub fn write_matrix_cache<T: Scalar>(path: &Path, m: &DMatrix<T>) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    out.write_all(MATRIX_CACHE_MAGIC)?;
    out.write_all(&(m.nrows() as u64).to_le_bytes())?;
    out.write_all(&(m.ncols() as u64).to_le_bytes())?;
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            out.write_all(&m[(r, c)].to_f64_lossy().to_le_bytes())?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn read_matrix_cache<T: Scalar>(path: &Path) -> Result<DMatrix<T>> {
    let mut input = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != MATRIX_CACHE_MAGIC {
        return Err(Error::Format(format!("bad magic {magic:?}")));
    }
    let mut word = [0u8; 8];
    input.read_exact(&mut word)?;
    let rows = usize::try_from(u64::from_le_bytes(word)).map_err(|e| Error::Format(e.to_string()))?;
    input.read_exact(&mut word)?;
    let cols = usize::try_from(u64::from_le_bytes(word)).map_err(|e| Error::Format(e.to_string()))?;
    let count = rows
        .checked_mul(cols)
        .ok_or_else(|| Error::Format(format!("{rows}x{cols} overflows")))?;
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    if bytes.len() != count * 8 {
        return Err(Error::Format(format!(
            "expected {} payload bytes for {rows}x{cols}, found {}",
            count * 8,
            bytes.len()
        )));
    }
    let values: Vec<T> = bytes
        .chunks_exact(8)
        .map(|c| T::lit(f64::from_le_bytes(c.try_into().expect("chunk of 8"))))
        .collect();
    Ok(DMatrix::from_row_slice(rows, cols, &values))
}
