//! Field snapshot files: one JSON header line, then little-endian `f64`
//! coefficients in row-major `(m, n)` order.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::SineField;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "N_g")]
    pub n_g: usize,
    pub alpha: f64,
    pub time: f64,
    /// `"omega"` or `"omega_t"`.
    #[serde(default = "default_field")]
    pub field: String,
}

fn default_field() -> String {
    "omega".into()
}

impl SnapshotHeader {
    pub fn new(n: usize, n_g: usize, alpha: f64, time: f64) -> Self {
        SnapshotHeader { n, n_g, alpha, time, field: default_field() }
    }
}

pub fn write_snapshot<W: Write>(mut w: W, header: &SnapshotHeader, field: &SineField) -> Result<()> {
    if header.n != field.n() {
        return Err(Error::Snapshot(format!("header N = {} but field N = {}", header.n, field.n())));
    }
    serde_json::to_writer(&mut w, header)?;
    w.write_all(b"\n")?;
    for v in field.coeffs() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_snapshot<R: Read>(r: R) -> Result<(SnapshotHeader, SineField)> {
    let mut r = BufReader::new(r);
    let mut line = String::new();
    r.read_line(&mut line)?;
    let header: SnapshotHeader =
        serde_json::from_str(line.trim_end()).map_err(|e| Error::Snapshot(format!("bad header: {e}")))?;
    let count = header.n * header.n;
    let mut bytes = vec![0u8; count * 8];
    r.read_exact(&mut bytes).map_err(|e| Error::Snapshot(format!("truncated payload: {e}")))?;
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(Error::Snapshot("trailing bytes after payload".into()));
    }
    let coeffs = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    let field = SineField::from_coeffs(header.n, coeffs)?;
    Ok((header, field))
}

pub fn save_snapshot(path: &Path, header: &SnapshotHeader, field: &SineField) -> Result<()> {
    write_snapshot(BufWriter::new(File::create(path)?), header, field)
}

pub fn load_snapshot(path: &Path) -> Result<(SnapshotHeader, SineField)> {
    read_snapshot(File::open(path)?)
}
