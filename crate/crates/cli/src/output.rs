use std::io::Write;
use std::path::Path;

use clap::ValueEnum;
use serde_json::Value;
use tempfile::NamedTempFile;

use crate::failure::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// 17 significant digits: parses back to the same `f64`.
pub fn float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn optional(v: Option<f64>) -> String {
    v.map(float).unwrap_or_default()
}

/// A CSV table with a fixed header.
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    fn to_bytes(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }
}

/// A report renderable as JSON (with `schema_version`) or as a CSV table.
pub struct Report {
    pub json: Value,
    pub table: Table,
}

impl Report {
    pub fn new(command: &str, mut json: Value, table: Table) -> Self {
        if let Value::Object(map) = &mut json {
            map.insert("schema_version".into(), SCHEMA_VERSION.into());
            map.insert("command".into(), command.into());
        }
        Self { json, table }
    }

    pub fn write(&self, path: &Path, format: Format) -> Result<(), CliError> {
        let bytes = match format {
            Format::Json => {
                let mut b = serde_json::to_vec_pretty(&self.json).expect("JSON values serialize");
                b.push(b'\n');
                b
            }
            Format::Csv => self.table.to_bytes(),
        };
        write_atomic(path, &bytes)
    }
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir).map_err(|e| CliError::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

pub fn write_table(path: &Path, table: &Table) -> Result<(), CliError> {
    write_atomic(path, &table.to_bytes())
}
