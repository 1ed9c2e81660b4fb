//! Tabular datasets: CSV with header `x1,…,xd,value`, one arm per row.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use gpucb::Point;

use crate::error::{BenchError, IngestError};

/// Reads a dataset file.
pub fn ingest_table(path: &Path) -> Result<Vec<(Point, f64)>, IngestError> {
    let file = File::open(path).map_err(|e| IngestError::Read {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    read_table(file, path)
}

/// Reads a dataset from any reader; `path` only labels errors.
pub fn read_table<R: Read>(reader: R, path: &Path) -> Result<Vec<(Point, f64)>, IngestError> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = csv.records();
    let read_err = |e: csv::Error| IngestError::Read {
        path: path.to_path_buf(),
        message: e.to_string(),
    };

    let header = match records.next() {
        None => return Err(IngestError::Empty { path: path.to_path_buf() }),
        Some(r) => r.map_err(read_err)?,
    };
    let d = check_header(&header).map_err(|message| IngestError::Header {
        path: path.to_path_buf(),
        message,
    })?;

    let mut rows = Vec::new();
    for (i, rec) in records.enumerate() {
        let row = i + 1;
        let rec = rec.map_err(read_err)?;
        if rec.len() != d + 1 {
            return Err(IngestError::ColumnCount {
                path: path.to_path_buf(),
                row,
                expected: d + 1,
                found: rec.len(),
            });
        }
        let cell = |c: usize| -> Result<f64, IngestError> {
            let column = if c == d {
                "value".to_string()
            } else {
                format!("x{}", c + 1)
            };
            let raw = &rec[c];
            match raw.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                Ok(v) => Err(IngestError::Cell {
                    path: path.to_path_buf(),
                    row,
                    column,
                    message: format!("value {v} is not finite"),
                }),
                Err(_) => Err(IngestError::Cell {
                    path: path.to_path_buf(),
                    row,
                    column,
                    message: format!("cannot parse {raw:?} as a number"),
                }),
            }
        };
        let coords = (0..d).map(cell).collect::<Result<Vec<_>, _>>()?;
        let value = cell(d)?;
        let point = Point::new(coords).expect("coordinates are finite and d ≥ 1");
        rows.push((point, value));
    }
    if rows.is_empty() {
        return Err(IngestError::Empty { path: path.to_path_buf() });
    }
    Ok(rows)
}

/// Dimension implied by a valid header.
fn check_header(header: &csv::StringRecord) -> Result<usize, String> {
    let names: Vec<&str> = header.iter().collect();
    if names.len() < 2 {
        return Err(format!(
            "expected x1,…,xd,value with d ≥ 1, found {} column(s)",
            names.len()
        ));
    }
    let d = names.len() - 1;
    for (i, name) in names[..d].iter().enumerate() {
        let want = format!("x{}", i + 1);
        if *name != want {
            return Err(format!("column {} should be {want:?}, found {name:?}", i + 1));
        }
    }
    if names[d] != "value" {
        return Err(format!("last column should be \"value\", found {:?}", names[d]));
    }
    Ok(d)
}

/// Writes rows with round-trip float formatting.
pub fn write_table<W: Write>(writer: W, rows: &[(Point, f64)]) -> csv::Result<()> {
    let d = rows.first().map_or(1, |(x, _)| x.dim());
    let mut out = csv::Writer::from_writer(writer);
    let mut header: Vec<String> = (1..=d).map(|i| format!("x{i}")).collect();
    header.push("value".into());
    out.write_record(&header)?;
    for (x, v) in rows {
        let mut rec: Vec<String> = x.coords().iter().map(f64::to_string).collect();
        rec.push(v.to_string());
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

pub fn save_table(path: &Path, rows: &[(Point, f64)]) -> Result<(), BenchError> {
    let file = File::create(path).map_err(|e| BenchError::io(path, e))?;
    write_table(file, rows).map_err(|e| BenchError::io(path, e.into()))
}
