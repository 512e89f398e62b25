//! CSV ingestion and emission.
//!
//! Dialect: comma delimiter, mandatory header row, decimal point, no
//! thousands separators, UTF-8. The body is strictly numeric. Floats
//! are serialized with the shortest round-trip decimal representation,
//! so a written file reparses to bit-identical values. Files are
//! written atomically (temp file in the target directory + rename).

use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use tempfile::NamedTempFile;

use crate::data::DataMatrix;
use crate::error::{Error, Result};

/// Shortest decimal representation that parses back to the same f64.
pub fn format_float(value: f64) -> String {
    format!("{value}")
}

/// Read a numeric CSV table. Parse failures name the offending file
/// line (1-based, header is line 1) and column.
pub fn read_csv(path: &Path) -> Result<DataMatrix> {
    let text = fs::read_to_string(path).map_err(|e| Error::CsvFormat {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_csv(&text, &path.display().to_string())
}

pub(crate) fn parse_csv(text: &str, path: &str) -> Result<DataMatrix> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::CsvFormat {
        path: path.to_string(),
        message: "missing header row".to_string(),
    })?;
    let names = split_header(header);
    let ncols = names.len();
    if ncols == 0 {
        return Err(Error::CsvFormat {
            path: path.to_string(),
            message: "header row has no fields".to_string(),
        });
    }

    let mut values: Vec<f64> = Vec::new();
    let mut nrows = 0usize;
    for (line_idx, line) in lines.enumerate() {
        let line_no = line_idx + 2;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != ncols {
            return Err(Error::CsvFormat {
                path: path.to_string(),
                message: format!(
                    "line {line_no} has {} fields, expected {ncols}",
                    fields.len()
                ),
            });
        }
        for (col_idx, field) in fields.iter().enumerate() {
            let parsed: f64 = field.trim().parse().map_err(|_| Error::CsvParse {
                path: path.to_string(),
                row: line_no,
                col: col_idx + 1,
                message: format!("{field:?} is not a number"),
            })?;
            if !parsed.is_finite() {
                return Err(Error::CsvParse {
                    path: path.to_string(),
                    row: line_no,
                    col: col_idx + 1,
                    message: format!("{field:?} is not finite"),
                });
            }
            values.push(parsed);
        }
        nrows += 1;
    }
    if nrows == 0 {
        return Err(Error::CsvFormat {
            path: path.to_string(),
            message: "no data rows".to_string(),
        });
    }
    let matrix = DMatrix::from_row_iterator(nrows, ncols, values);
    DataMatrix::with_names(matrix, Some(names))
}

/// Write a table with its header. Atomic: the target never holds a
/// partial file.
pub fn write_csv(path: &Path, data: &DataMatrix) -> Result<()> {
    let mut out = String::new();
    let names = data.column_names_or_default();
    push_header(&mut out, &names);
    for i in 0..data.nrows() {
        for j in 0..data.ncols() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&format_float(data.values()[(i, j)]));
        }
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())
}

/// Write a bare matrix with generated column labels; used for limit
/// matrices.
pub fn write_matrix_csv(path: &Path, matrix: &DMatrix<f64>) -> Result<()> {
    write_atomic(path, matrix_csv_string(matrix).as_bytes())
}

/// CSV text of a matrix with `c1..ck` labels.
pub fn matrix_csv_string(matrix: &DMatrix<f64>) -> String {
    let mut out = String::new();
    let names: Vec<String> = (1..=matrix.ncols()).map(|k| format!("c{k}")).collect();
    push_header(&mut out, &names);
    for i in 0..matrix.nrows() {
        for j in 0..matrix.ncols() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&format_float(matrix[(i, j)]));
        }
        out.push('\n');
    }
    out
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty());
    let mut tmp = match dir {
        Some(dir) => NamedTempFile::new_in(dir)?,
        None => NamedTempFile::new_in(".")?,
    };
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn push_header(out: &mut String, names: &[String]) {
    for (j, name) in names.iter().enumerate() {
        if j > 0 {
            out.push(',');
        }
        out.push_str(&quote_if_needed(name));
    }
    out.push('\n');
}

fn quote_if_needed(name: &str) -> String {
    if name.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", name.replace('"', "\"\""))
    } else {
        name.to_string()
    }
}

/// Header fields with minimal quote handling (labels containing commas
/// arrive quoted from our own writer).
fn split_header(line: &str) -> Vec<String> {
    let mut fields = Vec::new();
    let mut current = String::new();
    let mut in_quotes = false;
    let mut chars = line.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '"' if in_quotes => {
                if chars.peek() == Some(&'"') {
                    chars.next();
                    current.push('"');
                } else {
                    in_quotes = false;
                }
            }
            '"' => in_quotes = true,
            ',' if !in_quotes => {
                fields.push(std::mem::take(&mut current));
            }
            _ => current.push(c),
        }
    }
    fields.push(current);
    fields
}
