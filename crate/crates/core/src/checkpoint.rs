//! CBF1 binary checkpoints.
//!
//! Layout (little-endian): magic `CBF1`, u32 n, f64 r, mu, alpha, beta, t,
//! then 3 n^3 complex coefficients as (re, im) f64 pairs in flat FFT index
//! order, all of component 1 first, then 2, then 3.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{CbfError, Result};
use crate::fields::{Grid, SpectralField};

pub const MAGIC: &[u8; 4] = b"CBF1";

/// Parameters stored alongside the state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckpointHeader {
    pub r: f64,
    pub mu: f64,
    pub alpha: f64,
    pub beta: f64,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub header: CheckpointHeader,
    pub field: SpectralField,
}

pub fn encode(header: &CheckpointHeader, field: &SpectralField) -> Vec<u8> {
    let n = field.grid().n();
    let mut out = Vec::with_capacity(4 + 4 + 5 * 8 + 3 * n * n * n * 16);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(n as u32).to_le_bytes());
    for v in [header.r, header.mu, header.alpha, header.beta, header.t] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for comp in &field.coeffs {
        for z in comp {
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    out
}

fn corrupt(msg: impl Into<String>) -> CbfError {
    CbfError::Checkpoint(msg.into())
}

pub fn decode(bytes: &[u8]) -> Result<Checkpoint> {
    if bytes.len() < 8 {
        return Err(corrupt("file too short for a header"));
    }
    if &bytes[..4] != MAGIC {
        return Err(corrupt(format!("bad magic {:?}", &bytes[..4])));
    }
    let n = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let grid = Grid::new(n).map_err(|_| corrupt(format!("invalid grid size {n}")))?;
    let expected = 8 + 5 * 8 + 3 * grid.len() * 16;
    if bytes.len() != expected {
        return Err(corrupt(format!(
            "expected {expected} bytes for n = {n}, found {}",
            bytes.len()
        )));
    }
    let mut floats = bytes[8..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()));
    let mut next = || floats.next().unwrap();
    let header = CheckpointHeader {
        r: next(),
        mu: next(),
        alpha: next(),
        beta: next(),
        t: next(),
    };
    let coeffs = std::array::from_fn(|_| {
        (0..grid.len())
            .map(|_| {
                let re = next();
                Complex64::new(re, next())
            })
            .collect()
    });
    let field = SpectralField::from_coeffs(grid, coeffs)?;
    Ok(Checkpoint { header, field })
}

pub fn write(path: &Path, header: &CheckpointHeader, field: &SpectralField) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&encode(header, field))?;
    w.flush()?;
    Ok(())
}

pub fn read(path: &Path) -> Result<Checkpoint> {
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
    decode(&bytes)
}
