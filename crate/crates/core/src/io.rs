//! The `ADF1` field file format.
//!
//! Layout (all little-endian, no padding):
//!
//! | bytes | content |
//! |-------|---------|
//! | 0..4  | ASCII `ADF1` |
//! | 4..8  | `u32` version, currently 1 |
//! | 8..12 | `u32` dimension `d` |
//! | 12..16| `u32` samples per axis `n` |
//! | 16..24| `f64` box length |
//! | 24..  | `n^d` `f64` values, row-major |

use std::fs;
use std::path::Path;

use crate::error::{DecodeError, Result};
use crate::grid::{Field, GridSpec};

pub const MAGIC: [u8; 4] = *b"ADF1";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 24;

pub fn encode_field(f: &Field) -> Vec<u8> {
    let g = f.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * g.len());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(g.dim() as u32).to_le_bytes());
    out.extend_from_slice(&(g.n() as u32).to_le_bytes());
    out.extend_from_slice(&g.box_length().to_le_bytes());
    for v in f.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_field(bytes: &[u8]) -> std::result::Result<Field, DecodeError> {
    if bytes.len() < 4 {
        return Err(DecodeError::TruncatedHeader);
    }
    let magic: [u8; 4] = bytes[0..4].try_into().unwrap();
    if magic != MAGIC {
        return Err(DecodeError::Magic(magic));
    }
    if bytes.len() < HEADER_LEN {
        return Err(DecodeError::TruncatedHeader);
    }
    let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap());
    let version = word(4);
    if version != VERSION {
        return Err(DecodeError::Version(version));
    }
    let d = word(8) as usize;
    let n = word(12) as usize;
    let box_length = f64::from_le_bytes(bytes[16..24].try_into().unwrap());
    let grid =
        GridSpec::new(d, n, box_length).map_err(|e| DecodeError::Header(e.to_string()))?;
    let payload = &bytes[HEADER_LEN..];
    let expected = grid.len() * 8;
    if payload.len() != expected {
        return Err(DecodeError::Payload { expected, got: payload.len() });
    }
    let values = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Field::new(grid, values).map_err(|e| DecodeError::Header(e.to_string()))
}

pub fn write_field(f: &Field, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, encode_field(f))?;
    Ok(())
}

pub fn read_field(path: impl AsRef<Path>) -> Result<Field> {
    let bytes = fs::read(path)?;
    Ok(decode_field(&bytes)?)
}
