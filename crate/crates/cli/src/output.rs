//! Result documents and their serialization.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};

pub const TOOL: &str = "synthmix";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Metadata block shared by every output: tool, version, command and
/// whatever settings the command adds.
pub fn metadata(command: &str, settings: Value) -> Value {
    let mut meta = json!({ "tool": TOOL, "version": VERSION, "command": command });
    if let (Some(obj), Value::Object(extra)) = (meta.as_object_mut(), settings) {
        obj.extend(extra);
    }
    meta
}

/// A table with a JSON metadata comment line.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub meta: Value,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(meta: Value, header: &[&str]) -> Self {
        Table { meta, header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Output {
    Table(Table),
    Json(Value),
}

impl Output {
    pub fn to_bytes(&self) -> CliResult<Vec<u8>> {
        match self {
            Output::Json(v) => {
                let mut s = serde_json::to_string_pretty(v).expect("JSON values always serialize");
                s.push('\n');
                Ok(s.into_bytes())
            }
            Output::Table(t) => {
                let mut buf = Vec::new();
                writeln!(buf, "# {}", t.meta).expect("write to Vec");
                let mut w = csv::Writer::from_writer(buf);
                let fail = |e: csv::Error| CliError::Core(e.into());
                w.write_record(&t.header).map_err(fail)?;
                for row in &t.rows {
                    w.write_record(row).map_err(fail)?;
                }
                w.into_inner().map_err(|e| CliError::Usage(e.to_string()))
            }
        }
    }

    pub fn write_to(&self, path: Option<&Path>) -> CliResult<()> {
        let bytes = self.to_bytes()?;
        match path {
            Some(p) => std::fs::write(p, &bytes).map_err(|source| CliError::Write { path: p.to_path_buf(), source }),
            None => std::io::stdout()
                .write_all(&bytes)
                .map_err(|source| CliError::Write { path: "<stdout>".into(), source }),
        }
    }
}

/// Shortest round-trip decimal form.
pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("plain data serializes")
}
