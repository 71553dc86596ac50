//! Minimal CSV emission and parsing: comma separator, header row,
//! fixed column order, '.' decimal separator, LF line endings. Fields
//! never need quoting here (numbers and bare identifiers only).

use super::atomic_write;
use crate::error::{Error, Result};
use std::path::Path;

#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        CsvTable {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// Deterministic float formatting with a round-trippable exponent form.
pub fn fmt_float(v: f64) -> String {
    format!("{v:e}")
}

pub fn write_csv(path: &Path, table: &CsvTable) -> Result<()> {
    let mut text = String::new();
    text.push_str(&table.header.join(","));
    text.push('\n');
    for row in &table.rows {
        text.push_str(&row.join(","));
        text.push('\n');
    }
    atomic_write(path, text.as_bytes())
}

pub fn read_csv(path: &Path) -> Result<CsvTable> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| Error::Format("empty CSV".into()))?
        .split(',')
        .map(|s| s.to_string())
        .collect();
    let mut rows = Vec::new();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let row: Vec<String> = line.split(',').map(|s| s.to_string()).collect();
        if row.len() != header.len() {
            return Err(Error::Format(format!(
                "CSV row has {} fields, header has {}",
                row.len(),
                header.len()
            )));
        }
        rows.push(row);
    }
    Ok(CsvTable { header, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_determinism() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("table.csv");
        let mut table = CsvTable::new(&["method", "n", "value"]);
        table.push_row(vec!["pod".into(), "2".into(), fmt_float(0.125)]);
        table.push_row(vec!["dod".into(), "2".into(), fmt_float(1.0 / 3.0)]);
        write_csv(&path, &table).unwrap();
        let first = std::fs::read(&path).unwrap();
        write_csv(&path, &table).unwrap();
        assert_eq!(first, std::fs::read(&path).unwrap());
        let back = read_csv(&path).unwrap();
        assert_eq!(back, table);
        // Values parse back exactly.
        assert_eq!(back.rows[1][2].parse::<f64>().unwrap(), 1.0 / 3.0);
    }

    #[test]
    fn ragged_rows_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "a,b\n1,2,3\n").unwrap();
        assert!(matches!(read_csv(&path), Err(Error::Format(_))));
    }
}
