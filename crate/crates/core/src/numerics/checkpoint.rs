//! Flat binary checkpoint for [`Mlp`] parameters.
//!
//! Layout, all little-endian:
//! `b"ISUBMLP1"`, activation code (u32), layer count + 1 (u64), layer dims
//! (u64 each), then per layer the row-major weights followed by the biases
//! as f64.

use std::io::{Read, Write};
use std::path::Path;

use super::{Activation, Matrix, Mlp};
use crate::error::{Error, Result};

const MAGIC: &[u8; 8] = b"ISUBMLP1";

pub fn write_mlp<W: Write>(model: &Mlp, mut w: W) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&model.activation().code().to_le_bytes())?;
    w.write_all(&(model.dims().len() as u64).to_le_bytes())?;
    for &d in model.dims() {
        w.write_all(&(d as u64).to_le_bytes())?;
    }
    for (wm, b) in model.weights().iter().zip(model.biases()) {
        for v in wm.data().iter().chain(b) {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_mlp<R: Read>(mut r: R) -> Result<Mlp> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Checkpoint("bad magic".into()));
    }
    let mut b4 = [0u8; 4];
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b4)?;
    let activation = Activation::from_code(u32::from_le_bytes(b4))
        .ok_or_else(|| Error::Checkpoint("unknown activation code".into()))?;
    r.read_exact(&mut b8)?;
    let n_dims = u64::from_le_bytes(b8) as usize;
    if !(2..=64).contains(&n_dims) {
        return Err(Error::Checkpoint(format!(
            "implausible layer count {n_dims}"
        )));
    }
    let mut dims = Vec::with_capacity(n_dims);
    for _ in 0..n_dims {
        r.read_exact(&mut b8)?;
        dims.push(u64::from_le_bytes(b8) as usize);
    }
    let mut read_f64s = |n: usize| -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            r.read_exact(&mut b8)?;
            out.push(f64::from_le_bytes(b8));
        }
        Ok(out)
    };
    let mut weights = Vec::new();
    let mut biases = Vec::new();
    for pair in dims.windows(2) {
        weights.push(Matrix::new(
            pair[0],
            pair[1],
            read_f64s(pair[0] * pair[1])?,
        )?);
        biases.push(read_f64s(pair[1])?);
    }
    Mlp::from_parameters(weights, biases, activation)
}

pub fn save_mlp(model: &Mlp, path: impl AsRef<Path>) -> Result<()> {
    let f = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(f);
    write_mlp(model, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_mlp(path: impl AsRef<Path>) -> Result<Mlp> {
    let f = std::fs::File::open(path)?;
    read_mlp(std::io::BufReader::new(f))
}
