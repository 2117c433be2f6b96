//! RFC-4180 CSV for matrices and label files.
//!
//! Feature files hold one sample per row; a first row whose first cell is not
//! a number is treated as a header. In memory, samples are columns.

use std::path::Path;

use mvcon_core::linalg::Matrix;

use crate::error::{CliError, Result};

/// Shortest round-trip scientific notation; `-0` is written as `0e0`.
pub fn format_f64(x: f64) -> String {
    if x == 0.0 {
        "0e0".to_string()
    } else {
        format!("{x:e}")
    }
}

fn parse_error(path: &Path, line: u64, column: usize, message: impl Into<String>) -> CliError {
    CliError::Parse {
        file: path.to_path_buf(),
        line,
        column,
        message: message.into(),
    }
}

fn reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    let file = std::fs::File::open(path).map_err(CliError::io(path))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file))
}

fn is_header(record: &csv::StringRecord) -> bool {
    record.get(0).map_or(false, |cell| cell.parse::<f64>().is_err())
}

fn csv_error(path: &Path, err: csv::Error) -> CliError {
    let line = err.position().map_or(0, |p| p.line());
    parse_error(path, line, 0, err.to_string())
}

/// Read a samples-as-rows CSV into a `D x N` matrix.
pub fn read_matrix(path: &Path) -> Result<Matrix> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (index, record) in reader(path)?.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(index as u64 + 1, |p| p.line());
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if index == 0 && is_header(&record) {
            continue;
        }
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(parse_error(
                path,
                line,
                record.len().min(expected) + 1,
                format!("expected {expected} fields, found {}", record.len()),
            ));
        }
        let mut row = Vec::with_capacity(expected);
        for (column, cell) in record.iter().enumerate() {
            let value: f64 = cell
                .parse()
                .map_err(|_| parse_error(path, line, column + 1, format!("not a number: {cell:?}")))?;
            if !value.is_finite() {
                return Err(parse_error(path, line, column + 1, format!("not finite: {cell:?}")));
            }
            row.push(value);
        }
        rows.push(row);
    }
    let d = width.unwrap_or(0);
    if rows.is_empty() || d == 0 {
        return Err(parse_error(path, 1, 1, "no numeric rows"));
    }
    Ok(Matrix::from_fn(d, rows.len(), |i, j| rows[j][i]))
}

/// Integer labels, one per line, remapped to dense indices in ascending order
/// of value. Returns the indices and the original value of each index.
pub fn read_labels(path: &Path) -> Result<(Vec<usize>, Vec<i64>)> {
    let mut raw = Vec::new();
    for (index, record) in reader(path)?.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(index as u64 + 1, |p| p.line());
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if index == 0 && record[0].parse::<i64>().is_err() && is_header(&record) {
            continue;
        }
        if record.len() != 1 {
            return Err(parse_error(path, line, 2, "expected one label per line"));
        }
        let value: i64 = record[0]
            .parse()
            .map_err(|_| parse_error(path, line, 1, format!("not an integer: {:?}", &record[0])))?;
        raw.push(value);
    }
    let mut values = raw.clone();
    values.sort_unstable();
    values.dedup();
    let labels = raw
        .iter()
        .map(|v| values.binary_search(v).expect("value comes from the same list"))
        .collect();
    Ok((labels, values))
}

/// Serialize rows of string cells as CSV.
pub fn table_bytes(header: &[String], rows: &[Vec<String>]) -> Vec<u8> {
    let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    if !header.is_empty() {
        writer.write_record(header).expect("writing to memory");
    }
    for row in rows {
        writer.write_record(row).expect("writing to memory");
    }
    writer.into_inner().expect("writing to memory")
}

/// A matrix as CSV, one matrix row per line, no header.
pub fn matrix_bytes(m: &Matrix) -> Vec<u8> {
    let rows: Vec<Vec<String>> = m
        .row_iter()
        .map(|r| r.iter().map(|&x| format_f64(x)).collect())
        .collect();
    table_bytes(&[], &rows)
}

/// Parse a CSV written by [`table_bytes`]: header plus string cells.
pub fn read_table(path: &Path) -> Result<(Vec<String>, Vec<(u64, Vec<String>)>)> {
    let mut records = reader(path)?.into_records();
    let header = match records.next() {
        Some(r) => r.map_err(|e| csv_error(path, e))?.iter().map(str::to_string).collect(),
        None => return Err(parse_error(path, 1, 1, "empty file")),
    };
    let mut rows = Vec::new();
    for record in records {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        rows.push((line, record.iter().map(str::to_string).collect()));
    }
    Ok((header, rows))
}
