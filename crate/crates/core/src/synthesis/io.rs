//! Series on disk: single-column CSV with header `value`, or a little-endian
//! `u64` length followed by that many `f64` values.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
struct Row {
    value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Binary,
}

impl Format {
    /// `.bin`, `.f64` and `.dat` are binary; everything else is CSV.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some("bin") | Some("f64") | Some("dat") => Format::Binary,
            _ => Format::Csv,
        }
    }
}

pub fn write_csv<W: Write>(out: W, values: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for &value in values {
        w.serialize(Row { value })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<f64>> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?.clone();
    if headers.len() != 1 || headers.get(0).map(str::trim) != Some("value") {
        return Err(Error::invalid(format!("expected a single `value` column, found {headers:?}")));
    }
    r.deserialize::<Row>()
        .map(|row| Ok(row?.value))
        .collect::<Result<Vec<_>>>()
        .and_then(check_finite)
}

pub fn write_binary<W: Write>(mut out: W, values: &[f64]) -> Result<()> {
    out.write_all(&(values.len() as u64).to_le_bytes())?;
    for v in values {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_binary<R: Read>(mut input: R) -> Result<Vec<f64>> {
    let mut len = [0u8; 8];
    input.read_exact(&mut len)?;
    let n = u64::from_le_bytes(len) as usize;
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    if bytes.len() != 8 * n {
        return Err(Error::invalid(format!(
            "binary series declares {n} values but carries {} bytes",
            bytes.len()
        )));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    check_finite(values)
}

fn check_finite(values: Vec<f64>) -> Result<Vec<f64>> {
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::invalid(format!("non-finite value at index {i}")));
    }
    Ok(values)
}

pub fn write_series(path: &Path, values: &[f64]) -> Result<()> {
    let out = BufWriter::new(File::create(path)?);
    match Format::from_path(path) {
        Format::Csv => write_csv(out, values),
        Format::Binary => write_binary(out, values),
    }
}

pub fn read_series(path: &Path) -> Result<Vec<f64>> {
    let input = BufReader::new(File::open(path)?);
    match Format::from_path(path) {
        Format::Csv => read_csv(input),
        Format::Binary => read_binary(input),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_exact() {
        let v = vec![0.1, -2.5e-300, 1.0 / 3.0, 12345.678];
        let mut buf = Vec::new();
        write_csv(&mut buf, &v).unwrap();
        assert!(buf.starts_with(b"value\n"));
        assert_eq!(read_csv(&buf[..]).unwrap(), v);
    }

    #[test]
    fn binary_round_trip_and_length_check() {
        let v = vec![1.5, -0.25, f64::MIN_POSITIVE];
        let mut buf = Vec::new();
        write_binary(&mut buf, &v).unwrap();
        assert_eq!(buf.len(), 8 + 24);
        assert_eq!(read_binary(&buf[..]).unwrap(), v);
        assert!(read_binary(&buf[..buf.len() - 1]).is_err());
    }

    #[test]
    fn wrong_header_is_rejected() {
        assert!(read_csv(&b"x\n1.0\n"[..]).is_err());
    }
}
