//! Flat binary dump of complex matrices.
//!
//! Layout: one ASCII header line
//! `intflab-matrix rows=<M> cols=<N> config=<hash>\n`, followed by
//! `M * N` row-major complex entries, each as two little-endian `f64`
//! (real, imaginary).

use std::fs;
use std::io::Write;
use std::path::Path;

use ndarray::Array2;
use num_complex::Complex64;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

const MAGIC: &str = "intflab-matrix";

/// Truncated SHA-256 of a canonical text rendering, as lowercase hex.
pub fn short_hash(canonical: &str) -> String {
    let digest = Sha256::digest(canonical.as_bytes());
    hex::encode(&digest[..8])
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixHeader {
    pub rows: usize,
    pub cols: usize,
    pub config_hash: String,
}

pub fn encode(data: &Array2<Complex64>, config_hash: &str) -> Vec<u8> {
    let (rows, cols) = data.dim();
    let mut out = format!("{MAGIC} rows={rows} cols={cols} config={config_hash}\n").into_bytes();
    out.reserve(rows * cols * 16);
    for z in data.iter() {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8]) -> std::result::Result<(MatrixHeader, Array2<Complex64>), String> {
    let newline = bytes.iter().position(|&b| b == b'\n').ok_or("missing header line")?;
    let header = std::str::from_utf8(&bytes[..newline]).map_err(|e| e.to_string())?;
    let mut parts = header.split_whitespace();
    if parts.next() != Some(MAGIC) {
        return Err("bad magic".into());
    }
    let mut rows = None;
    let mut cols = None;
    let mut hash = None;
    for kv in parts {
        match kv.split_once('=') {
            Some(("rows", v)) => rows = v.parse::<usize>().ok(),
            Some(("cols", v)) => cols = v.parse::<usize>().ok(),
            Some(("config", v)) => hash = Some(v.to_string()),
            _ => return Err(format!("unexpected header field {kv:?}")),
        }
    }
    let (rows, cols, config_hash) = match (rows, cols, hash) {
        (Some(r), Some(c), Some(h)) => (r, c, h),
        _ => return Err("incomplete header".into()),
    };
    let body = &bytes[newline + 1..];
    if body.len() != rows * cols * 16 {
        return Err(format!("expected {} payload bytes, found {}", rows * cols * 16, body.len()));
    }
    let values: Vec<Complex64> = body
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            Complex64::new(re, im)
        })
        .collect();
    let data = Array2::from_shape_vec((rows, cols), values).map_err(|e| e.to_string())?;
    Ok((MatrixHeader { rows, cols, config_hash }, data))
}

pub fn write(path: &Path, data: &Array2<Complex64>, config_hash: &str) -> Result<()> {
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(&encode(data, config_hash)).map_err(|e| Error::io(path, e))
}

pub fn read(path: &Path) -> Result<(MatrixHeader, Array2<Complex64>)> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes).map_err(|message| Error::Parse { path: path.to_path_buf(), message })
}
