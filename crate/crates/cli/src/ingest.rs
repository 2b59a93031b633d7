//! Delimited-text panels: one sequence per line, one time point per column.

use std::path::Path;

use slseg::{DataPanel, Model};

use crate::error::{CliError, Result};

/// A parsed panel together with its row labels.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub row_ids: Vec<String>,
    pub panel: DataPanel,
}

pub fn ingest(path: &Path, model: Model, row_ids: bool) -> Result<Table> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_table(&text, path, model, row_ids)
}

/// Tab-separated if the first data line has a tab, comma-separated otherwise.
fn sniff_delimiter(text: &str) -> u8 {
    let first = text.lines().find(|l| !l.trim().is_empty() && !l.starts_with('#'));
    match first {
        Some(line) if line.contains('\t') => b'\t',
        _ => b',',
    }
}

pub fn parse_table(text: &str, path: &Path, model: Model, row_ids: bool) -> Result<Table> {
    let parse_err = |line: u64, msg: String| CliError::Parse { path: path.to_path_buf(), line, msg };
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(sniff_delimiter(text))
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let mut ids = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let mut fields = record.iter();
        if row_ids {
            let id = fields.next().unwrap_or_default();
            ids.push(id.to_string());
        } else {
            ids.push((rows.len() + 1).to_string());
        }
        let mut row = Vec::with_capacity(record.len());
        for (col, field) in fields.enumerate() {
            let value: f64 = field
                .parse()
                .map_err(|_| parse_err(line, format!("column {}: '{field}' is not a number", col + 1)))?;
            if !value.is_finite() {
                return Err(parse_err(line, format!("column {}: non-finite value '{field}'", col + 1)));
            }
            if model == Model::Poisson && (value < 0.0 || value.fract() != 0.0) {
                return Err(parse_err(
                    line,
                    format!("column {}: Poisson counts must be nonnegative integers, got {field}", col + 1),
                ));
            }
            row.push(value);
        }
        match width {
            None if row.is_empty() => return Err(parse_err(line, "row has no observations".into())),
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(parse_err(line, format!("ragged row: expected {w} observations, found {}", row.len())));
            }
            Some(_) => {}
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(parse_err(0, "no data rows".into()));
    }
    Ok(Table { row_ids: ids, panel: DataPanel::from_rows(rows)? })
}
