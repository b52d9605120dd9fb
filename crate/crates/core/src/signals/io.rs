//! Signal files: CSV with one value per line, or a binary layout of a
//! little-endian `u64` length followed by little-endian `f64` values.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use super::SignalVector;
use crate::{Error, Result};

pub fn write_csv<W: Write>(mut w: W, values: &[f64]) -> Result<()> {
    for v in values {
        writeln!(w, "{v}")?;
    }
    Ok(())
}

pub fn read_csv<R: Read>(r: R) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (lineno, line) in BufReader::new(r).lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let v: f64 = t
            .parse()
            .map_err(|_| Error::invalid(format!("line {}: not a number: {t:?}", lineno + 1)))?;
        out.push(v);
    }
    Ok(out)
}

pub fn write_binary<W: Write>(mut w: W, values: &[f64]) -> Result<()> {
    w.write_all(&(values.len() as u64).to_le_bytes())?;
    for v in values {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_binary<R: Read>(mut r: R) -> Result<Vec<f64>> {
    let mut header = [0u8; 8];
    r.read_exact(&mut header)?;
    let len = u64::from_le_bytes(header) as usize;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != len * 8 {
        return Err(Error::invalid(format!(
            "binary signal header says {len} values but payload holds {} bytes",
            bytes.len()
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect())
}

/// Picks the format from the extension: `.bin` is binary, anything else CSV.
pub fn read_path(path: &Path) -> Result<Vec<f64>> {
    let file = std::fs::File::open(path)?;
    if is_binary(path) {
        read_binary(file)
    } else {
        read_csv(file)
    }
}

pub fn write_path(path: &Path, values: &[f64]) -> Result<()> {
    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
    if is_binary(path) {
        write_binary(file, values)
    } else {
        write_csv(file, values)
    }
}

pub fn read_signal(path: &Path) -> Result<SignalVector> {
    SignalVector::new(read_path(path)?)
}

fn is_binary(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "bin")
}
