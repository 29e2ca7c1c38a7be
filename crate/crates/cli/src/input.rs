//! CSV ingestion: header row required, locale-independent numeric
//! parsing, malformed rows reported with line numbers.

use std::collections::BTreeMap;
use std::path::Path;

use crate::CliError;

pub struct Table {
    headers: Vec<String>,
    /// Raw cells, row-major; empty strings for blank cells.
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn load(path: &Path) -> Result<Table, CliError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(false)
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| CliError::validation(format!("cannot read {}: {e}", path.display())))?;
        let headers: Vec<String> = reader
            .headers()
            .map_err(|e| CliError::validation(format!("{}: bad header row: {e}", path.display())))?
            .iter()
            .map(str::to_string)
            .collect();
        if headers.is_empty() {
            return Err(CliError::validation(format!(
                "{}: a header row is required",
                path.display()
            )));
        }
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| {
                let line = e
                    .position()
                    .map(|p| p.line().to_string())
                    .unwrap_or_else(|| "?".into());
                CliError::validation(format!("{}: line {line}: {e}", path.display()))
            })?;
            rows.push(record.iter().map(str::to_string).collect());
        }
        Ok(Table { headers, rows })
    }

    fn column_index(&self, name: &str) -> Result<usize, CliError> {
        self.headers.iter().position(|h| h == name).ok_or_else(|| {
            CliError::validation(format!(
                "no column named {name:?}; file has columns {:?}",
                self.headers
            ))
        })
    }

    /// Numeric column; blank cells are an error.
    pub fn numeric(&self, name: &str) -> Result<Vec<f64>, CliError> {
        let idx = self.column_index(name)?;
        self.rows
            .iter()
            .enumerate()
            .map(|(i, row)| parse_cell(&row[idx], name, i))
            .collect()
    }

    /// Numeric column with blank cells skipped (wide layouts).
    pub fn numeric_sparse(&self, name: &str) -> Result<Vec<f64>, CliError> {
        let idx = self.column_index(name)?;
        let mut out = Vec::new();
        for (i, row) in self.rows.iter().enumerate() {
            if row[idx].is_empty() {
                continue;
            }
            out.push(parse_cell(&row[idx], name, i)?);
        }
        Ok(out)
    }

    /// Binary column: cells must parse to 0 or 1.
    pub fn binary(&self, name: &str) -> Result<Vec<bool>, CliError> {
        let vals = self.numeric(name)?;
        vals.iter()
            .enumerate()
            .map(|(i, &v)| {
                if v == 0.0 {
                    Ok(false)
                } else if v == 1.0 {
                    Ok(true)
                } else {
                    Err(CliError::validation(format!(
                        "column {name:?} must hold 0/1 values, found {v} at data line {}",
                        i + 2
                    )))
                }
            })
            .collect()
    }

    /// Label column: arbitrary strings mapped to dense indices in order
    /// of first appearance.
    pub fn labels(&self, name: &str) -> Result<Vec<usize>, CliError> {
        let idx = self.column_index(name)?;
        let mut map: BTreeMap<String, usize> = BTreeMap::new();
        let mut next = 0usize;
        let mut out = Vec::with_capacity(self.rows.len());
        for row in &self.rows {
            let key = row[idx].clone();
            let label = *map.entry(key).or_insert_with(|| {
                let l = next;
                next += 1;
                l
            });
            out.push(label);
        }
        Ok(out)
    }

    /// Group sizes and concatenated values ordered by first appearance of
    /// each group key.
    pub fn grouped(&self, value_col: &str, group_col: &str) -> Result<Vec<Vec<f64>>, CliError> {
        let values = self.numeric(value_col)?;
        let vi = self.column_index(group_col)?;
        let mut order: Vec<String> = Vec::new();
        let mut groups: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for (row, &v) in self.rows.iter().zip(&values) {
            let key = row[vi].clone();
            if !groups.contains_key(&key) {
                order.push(key.clone());
            }
            groups.entry(key).or_default().push(v);
        }
        Ok(order
            .into_iter()
            .map(|k| groups.remove(&k).unwrap())
            .collect())
    }
}

fn parse_cell(cell: &str, name: &str, row: usize) -> Result<f64, CliError> {
    cell.parse::<f64>().map_err(|_| {
        CliError::validation(format!(
            "column {name:?}: cannot parse {cell:?} as a number at data line {}",
            row + 2
        ))
    })
}

/// Split a `--cols` argument into names.
pub fn split_cols(cols: &str) -> Vec<String> {
    cols.split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}
