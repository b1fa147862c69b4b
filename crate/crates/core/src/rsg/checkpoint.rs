use std::io::{Read, Write};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::rsg::{RawFactors, RsgState};
use crate::Scalar;

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"RSG+";
pub const CHECKPOINT_VERSION: u16 = 1;

/// Writes `RSG+`, version (u16), `d_x, d_y, k, j` (u64 each), then the six factors
/// `Ũ, Ṽ, S_u, S_v, Q_u, Q_v` as row-major f64, all little-endian.
pub fn write_checkpoint<T: Scalar, W: Write>(out: &mut W, state: &RsgState<T>) -> Result<()> {
    let (dx, dy) = state.dims();
    out.write_all(CHECKPOINT_MAGIC)?;
    out.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
    for v in [dx as u64, dy as u64, state.k() as u64, state.j] {
        out.write_all(&v.to_le_bytes())?;
    }
    for m in state.raw().as_array() {
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                out.write_all(&m[(r, c)].to_f64_lossy().to_le_bytes())?;
            }
        }
    }
    Ok(())
}

fn read_u64<R: Read>(input: &mut R) -> Result<u64> {
    let mut word = [0u8; 8];
    input.read_exact(&mut word)?;
    Ok(u64::from_le_bytes(word))
}

fn read_matrix<T: Scalar, R: Read>(input: &mut R, rows: usize, cols: usize) -> Result<DMatrix<T>> {
    let mut values = Vec::with_capacity(rows * cols);
    for _ in 0..rows * cols {
        let mut word = [0u8; 8];
        input.read_exact(&mut word)?;
        values.push(T::lit(f64::from_le_bytes(word)));
    }
    Ok(DMatrix::from_row_slice(rows, cols, &values))
}

/// Reads a checkpoint and revalidates every manifold constraint.
pub fn read_checkpoint<T: Scalar, R: Read>(input: &mut R) -> Result<RsgState<T>> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(Error::Format(format!("bad checkpoint magic {magic:?}")));
    }
    let mut version = [0u8; 2];
    input.read_exact(&mut version)?;
    let version = u16::from_le_bytes(version);
    if version != CHECKPOINT_VERSION {
        return Err(Error::Format(format!("unsupported checkpoint version {version}")));
    }
    let to_usize = |v: u64| usize::try_from(v).map_err(|e| Error::Format(e.to_string()));
    let dx = to_usize(read_u64(input)?)?;
    let dy = to_usize(read_u64(input)?)?;
    let k = to_usize(read_u64(input)?)?;
    let j = read_u64(input)?;
    if k == 0 || k > dx.min(dy) {
        return Err(Error::Format(format!("header has k = {k} for dims {dx}, {dy}")));
    }
    let raw = RawFactors {
        u_tilde: read_matrix(input, dx, k)?,
        v_tilde: read_matrix(input, dy, k)?,
        s_u: read_matrix(input, k, k)?,
        s_v: read_matrix(input, k, k)?,
        q_u: read_matrix(input, k, k)?,
        q_v: read_matrix(input, k, k)?,
    };
    RsgState::from_raw(raw, j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rsg::{init_state, step, Hyperparams};

    #[test]
    fn roundtrip_is_exact() {
        let s0 = init_state::<f64>(6, 4, 2, 5).unwrap();
        let x = DMatrix::from_fn(8, 6, |i, j| ((i + 3 * j) as f64).sin());
        let y = DMatrix::from_fn(8, 4, |i, j| ((2 * i + j) as f64).cos());
        let s = step(&s0, &x, &y, &Hyperparams::new(2)).unwrap();
        let mut bytes = Vec::new();
        write_checkpoint(&mut bytes, &s).unwrap();
        assert_eq!(&bytes[..4], b"RSG+");
        assert_eq!(u16::from_le_bytes([bytes[4], bytes[5]]), 1);
        assert_eq!(bytes.len(), 6 + 32 + 8 * (6 * 2 + 4 * 2 + 4 * 4));
        let back: RsgState<f64> = read_checkpoint(&mut bytes.as_slice()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn rejects_corruption() {
        let s = init_state::<f64>(3, 3, 1, 0).unwrap();
        let mut bytes = Vec::new();
        write_checkpoint(&mut bytes, &s).unwrap();
        let mut bad_magic = bytes.clone();
        bad_magic[0] = b'X';
        assert!(matches!(
            read_checkpoint::<f64, _>(&mut bad_magic.as_slice()),
            Err(Error::Format(_))
        ));
        let truncated = &bytes[..bytes.len() - 3];
        assert!(read_checkpoint::<f64, _>(&mut &truncated[..]).is_err());
        // Break orthonormality of Ũ.
        let mut infeasible = bytes.clone();
        infeasible[38..46].copy_from_slice(&2.0f64.to_le_bytes());
        assert!(matches!(
            read_checkpoint::<f64, _>(&mut infeasible.as_slice()),
            Err(Error::Infeasible(_))
        ));
    }
}
