//! CSV input and output. Files carry a header row; floats are written in
//! round-trippable scientific notation.

use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::harness::fmt_float;

/// Numeric table with its column names.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub values: Array2<f64>,
}

pub fn read_table(path: &Path) -> Result<Table> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let d = headers.len();
    let mut values = Vec::new();
    let mut n = 0;
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() != d {
            return Err(Error::LengthMismatch {
                expected: d,
                actual: rec.len(),
            });
        }
        for field in rec.iter() {
            let x: f64 = field.parse().map_err(|_| {
                Error::Domain(format!("row {}: `{field}` is not a number", line + 1))
            })?;
            values.push(x);
        }
        n += 1;
    }
    let values = Array2::from_shape_vec((n, d), values).expect("row lengths checked");
    Ok(Table { headers, values })
}

pub fn write_table<'a, R>(path: &Path, headers: &[&str], rows: R) -> Result<()>
where
    R: IntoIterator<Item = &'a [f64]>,
{
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(headers)?;
    for row in rows {
        w.write_record(row.iter().map(|&x| fmt_float(x)))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a matrix with headers `prefix1, prefix2, ...`.
pub fn write_matrix(path: &Path, prefix: &str, values: &Array2<f64>) -> Result<()> {
    let headers: Vec<String> = (1..=values.ncols()).map(|j| format!("{prefix}{j}")).collect();
    let refs: Vec<&str> = headers.iter().map(String::as_str).collect();
    let rows: Vec<Vec<f64>> = values.rows().into_iter().map(|r| r.to_vec()).collect();
    write_table(path, &refs, rows.iter().map(Vec::as_slice))
}
