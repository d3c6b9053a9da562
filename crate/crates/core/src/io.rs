//! Matrix and label file formats.
//!
//! * CSV: one matrix row per line, comma separated. Written with the shortest
//!   exponent form that round-trips, so reading back is bit-exact.
//! * `f64le`: two little-endian `u64` counts `(rows, cols)` followed by
//!   `rows * cols` little-endian `f64` values in row-major order.
//! * Labels: one non-negative integer per line.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixFormat {
    Csv,
    F64le,
}

impl MatrixFormat {
    pub fn extension(self) -> &'static str {
        match self {
            MatrixFormat::Csv => "csv",
            MatrixFormat::F64le => "f64",
        }
    }
}

pub fn read_matrix(path: &Path, format: MatrixFormat) -> Result<Array2<f64>> {
    match format {
        MatrixFormat::Csv => read_csv_matrix(path),
        MatrixFormat::F64le => read_f64le_matrix(path),
    }
}

pub fn write_matrix(path: &Path, m: &Array2<f64>, format: MatrixFormat) -> Result<()> {
    match format {
        MatrixFormat::Csv => write_csv_matrix(path, m),
        MatrixFormat::F64le => write_f64le_matrix(path, m),
    }
}

pub fn read_csv_matrix(path: &Path) -> Result<Array2<f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut data = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut count = 0;
        for field in line.split(',') {
            let field = field.trim();
            let x: f64 = field.parse().map_err(|_| {
                Error::format(path, format!("line {}: cannot parse {field:?} as a number", lineno + 1))
            })?;
            if !x.is_finite() {
                return Err(Error::input(format!(
                    "{}: non-finite value on line {}",
                    path.display(),
                    lineno + 1
                )));
            }
            data.push(x);
            count += 1;
        }
        match cols {
            None => cols = Some(count),
            Some(c) if c != count => {
                return Err(Error::format(
                    path,
                    format!("line {} has {count} fields, expected {c}", lineno + 1),
                ))
            }
            _ => {}
        }
        rows += 1;
    }
    let cols = cols.ok_or_else(|| Error::format(path, "empty matrix file"))?;
    Array2::from_shape_vec((rows, cols), data).map_err(|e| Error::format(path, e.to_string()))
}

pub fn write_csv_matrix(path: &Path, m: &Array2<f64>) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io_err = |e| Error::io(path, e);
    for row in m.rows() {
        let mut first = true;
        for x in row {
            if !first {
                w.write_all(b",").map_err(io_err)?;
            }
            first = false;
            write!(w, "{x:e}").map_err(io_err)?;
        }
        w.write_all(b"\n").map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

pub fn read_f64le_matrix(path: &Path) -> Result<Array2<f64>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_f64le(&bytes).map_err(|msg| match msg {
        DecodeError::Format(m) => Error::format(path, m),
        DecodeError::NonFinite(idx) => Error::input(format!(
            "{}: non-finite value at flat index {idx}",
            path.display()
        )),
    })
}

enum DecodeError {
    Format(String),
    NonFinite(usize),
}

fn decode_f64le(bytes: &[u8]) -> std::result::Result<Array2<f64>, DecodeError> {
    if bytes.len() < 16 {
        return Err(DecodeError::Format("file shorter than the 16-byte header".into()));
    }
    let rows = u64::from_le_bytes(bytes[0..8].try_into().unwrap());
    let cols = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    let count = rows
        .checked_mul(cols)
        .and_then(|c| usize::try_from(c).ok())
        .ok_or_else(|| DecodeError::Format(format!("dimensions {rows}x{cols} overflow")))?;
    let payload = &bytes[16..];
    if payload.len() != count * 8 {
        return Err(DecodeError::Format(format!(
            "expected {} payload bytes for {rows}x{cols}, found {}",
            count * 8,
            payload.len()
        )));
    }
    let mut data = Vec::with_capacity(count);
    for (idx, chunk) in payload.chunks_exact(8).enumerate() {
        let x = f64::from_le_bytes(chunk.try_into().unwrap());
        if !x.is_finite() {
            return Err(DecodeError::NonFinite(idx));
        }
        data.push(x);
    }
    Array2::from_shape_vec((rows as usize, cols as usize), data)
        .map_err(|e| DecodeError::Format(e.to_string()))
}

pub fn write_f64le_matrix(path: &Path, m: &Array2<f64>) -> Result<()> {
    let mut bytes = Vec::with_capacity(16 + 8 * m.len());
    bytes.extend_from_slice(&(m.nrows() as u64).to_le_bytes());
    bytes.extend_from_slice(&(m.ncols() as u64).to_le_bytes());
    for x in m.iter() {
        bytes.extend_from_slice(&x.to_le_bytes());
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_labels(path: &Path) -> Result<Vec<usize>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim().parse::<usize>().map_err(|_| {
                Error::format(path, format!("line {}: {:?} is not a cluster id", i + 1, l.trim()))
            })
        })
        .collect()
}

pub fn write_labels(path: &Path, labels: &[usize]) -> Result<()> {
    let mut out = String::with_capacity(labels.len() * 3);
    for l in labels {
        out.push_str(&l.to_string());
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
