//! Matrix file formats.
//!
//! * CSV: one matrix row (feature) per line, comma separated, optional
//!   header line.
//! * Binary: a 16-byte little-endian header (the magic `OPSK`, `u32` rows,
//!   `u32` cols, `u32` reserved and zero), followed by `rows·cols` row-major
//!   `f64` values.
//!
//! Reals are written with 17 significant digits so every `f64` survives a
//! text round trip.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use faer::{Mat, MatRef};

use crate::error::{Error, Result};

pub const BINARY_MAGIC: [u8; 4] = *b"OPSK";
pub const BINARY_HEADER_LEN: usize = 16;

/// On-disk matrix encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    Csv { header: bool },
    Binary,
}

/// A matrix read from disk, with the CSV header when one was present.
#[derive(Debug, Clone)]
pub struct LoadedMatrix {
    pub values: Mat<f64>,
    pub header: Option<Vec<String>>,
}

/// Formats a real with 17 significant digits.
pub fn format_real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn read_matrix(path: &Path, format: MatrixFormat) -> Result<LoadedMatrix> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    match format {
        MatrixFormat::Csv { header } => read_csv(reader, header, path),
        MatrixFormat::Binary => read_binary(reader, path),
    }
}

pub fn write_matrix(
    path: &Path,
    values: MatRef<'_, f64>,
    format: MatrixFormat,
    header: Option<&[String]>,
) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    match format {
        MatrixFormat::Csv { .. } => write_csv(&mut w, values, header),
        MatrixFormat::Binary => write_binary(&mut w, values),
    }
    .and_then(|()| w.flush())
    .map_err(|e| Error::io(path, e))
}

/// Parses CSV matrix text. `origin` only labels errors.
pub fn read_csv(reader: impl Read, header: bool, origin: &Path) -> Result<LoadedMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(header)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let names = if header {
        let h = rdr
            .headers()
            .map_err(|e| Error::format(origin, e.to_string()))?;
        Some(h.iter().map(str::to_owned).collect::<Vec<_>>())
    } else {
        None
    };
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::format(origin, e.to_string()))?;
        let row = rec
            .iter()
            .enumerate()
            .map(|(j, field)| parse_real(field, i, j, origin))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    let p = rows.len();
    let n = rows.first().map_or(0, Vec::len);
    if p == 0 || n == 0 {
        return Err(Error::format(origin, "no matrix entries"));
    }
    if let Some(names) = &names {
        if names.len() != n {
            return Err(Error::format(
                origin,
                format!("header has {} names for {n} columns", names.len()),
            ));
        }
    }
    Ok(LoadedMatrix {
        values: Mat::from_fn(p, n, |i, j| rows[i][j]),
        header: names,
    })
}

fn parse_real(field: &str, row: usize, col: usize, origin: &Path) -> Result<f64> {
    match field.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(v) => Err(Error::format(
            origin,
            format!("non-finite value {v} at row {row}, column {col}"),
        )),
        Err(_) => Err(Error::format(
            origin,
            format!("cannot parse '{field}' at row {row}, column {col}"),
        )),
    }
}

pub fn write_csv(
    w: &mut impl Write,
    values: MatRef<'_, f64>,
    header: Option<&[String]>,
) -> std::io::Result<()> {
    if let Some(names) = header {
        writeln!(w, "{}", names.join(","))?;
    }
    let mut line = String::new();
    for i in 0..values.nrows() {
        line.clear();
        for j in 0..values.ncols() {
            if j > 0 {
                line.push(',');
            }
            line.push_str(&format_real(values[(i, j)]));
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

pub fn read_binary(mut reader: impl Read, origin: &Path) -> Result<LoadedMatrix> {
    let mut head = [0u8; BINARY_HEADER_LEN];
    reader
        .read_exact(&mut head)
        .map_err(|_| Error::format(origin, "truncated binary header"))?;
    if head[..4] != BINARY_MAGIC {
        return Err(Error::format(origin, "missing OPSK magic"));
    }
    let word = |k: usize| u32::from_le_bytes(head[k..k + 4].try_into().unwrap());
    let (rows, cols, reserved) = (word(4) as usize, word(8) as usize, word(12));
    if reserved != 0 {
        return Err(Error::format(
            origin,
            format!("reserved header word is {reserved}, expected 0"),
        ));
    }
    if rows == 0 || cols == 0 {
        return Err(Error::format(origin, format!("empty shape {rows}x{cols}")));
    }
    let count = rows
        .checked_mul(cols)
        .ok_or_else(|| Error::format(origin, "shape overflows"))?;
    let mut body = Vec::new();
    reader
        .read_to_end(&mut body)
        .map_err(|e| Error::io(origin, e))?;
    if body.len() != count * 8 {
        return Err(Error::format(
            origin,
            format!(
                "expected {} payload bytes for {rows}x{cols}, found {}",
                count * 8,
                body.len()
            ),
        ));
    }
    let data: Vec<f64> = body
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
        .collect();
    if let Some(k) = data.iter().position(|v| !v.is_finite()) {
        return Err(Error::format(
            origin,
            format!("non-finite value at row {}, column {}", k / cols, k % cols),
        ));
    }
    Ok(LoadedMatrix {
        values: Mat::from_fn(rows, cols, |i, j| data[i * cols + j]),
        header: None,
    })
}

pub fn write_binary(w: &mut impl Write, values: MatRef<'_, f64>) -> std::io::Result<()> {
    let too_big =
        |_| std::io::Error::new(std::io::ErrorKind::InvalidInput, "dimension exceeds u32");
    let rows = u32::try_from(values.nrows()).map_err(too_big)?;
    let cols = u32::try_from(values.ncols()).map_err(too_big)?;
    w.write_all(&BINARY_MAGIC)?;
    w.write_all(&rows.to_le_bytes())?;
    w.write_all(&cols.to_le_bytes())?;
    w.write_all(&0u32.to_le_bytes())?;
    for i in 0..values.nrows() {
        for j in 0..values.ncols() {
            w.write_all(&values[(i, j)].to_le_bytes())?;
        }
    }
    Ok(())
}
