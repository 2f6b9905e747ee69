//! Reading tables from CSV and JSON text.
//!
//! Row and column numbers in errors are 1-based.

use serde_json::Value;

use super::ContingencyTable;
use crate::error::{Error, Result};

/// Comma-separated rows of nonnegative integers. Blank lines and lines
/// starting with `#` are skipped.
pub fn parse_csv(text: &str) -> Result<ContingencyTable> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse(e.to_string()))?;
        let row = record
            .iter()
            .enumerate()
            .map(|(j, field)| {
                field.parse::<u64>().map_err(|_| Error::InvalidCell {
                    row: i + 1,
                    col: j + 1,
                    reason: format!("expected a nonnegative integer, got {field:?}"),
                })
            })
            .collect::<Result<Vec<u64>>>()?;
        rows.push(row);
    }
    ContingencyTable::new(rows)
}

/// A JSON object `{"counts": [[...], ...]}`.
pub fn parse_json(text: &str) -> Result<ContingencyTable> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let counts = value
        .get("counts")
        .ok_or_else(|| Error::Parse("expected an object with a \"counts\" field".into()))?
        .as_array()
        .ok_or_else(|| Error::Parse("\"counts\" must be an array of rows".into()))?;
    let mut rows = Vec::with_capacity(counts.len());
    for (i, row) in counts.iter().enumerate() {
        let cells = row
            .as_array()
            .ok_or_else(|| Error::InvalidTable(format!("row {} is not an array", i + 1)))?;
        let row = cells
            .iter()
            .enumerate()
            .map(|(j, cell)| {
                cell.as_u64().ok_or_else(|| Error::InvalidCell {
                    row: i + 1,
                    col: j + 1,
                    reason: format!("expected a nonnegative integer, got {cell}"),
                })
            })
            .collect::<Result<Vec<u64>>>()?;
        rows.push(row);
    }
    ContingencyTable::new(rows)
}

/// JSON when the text starts with `{`, CSV otherwise.
pub fn parse_table(text: &str) -> Result<ContingencyTable> {
    if text.trim_start().starts_with('{') {
        parse_json(text)
    } else {
        parse_csv(text)
    }
}
