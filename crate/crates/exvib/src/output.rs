//! Artifact writers. Every artifact carries the effective config: CSV files
//! as leading `# ` comment lines, JSON documents under a `config` key.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::config::Config;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Full-precision float for CSV cells (17 significant digits).
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn open_sink(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Table with a fixed header; rows are preformatted cells.
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

/// Writes `# command`, `# options` and the config echo, then the table.
pub fn write_csv(
    out: &mut dyn Write,
    command: &str,
    options: &impl Serialize,
    config: &Config,
    table: &Table,
) -> Result<(), CliError> {
    writeln!(out, "# exvib {command}")?;
    writeln!(out, "# options: {}", serde_json::to_string(options)?)?;
    for line in config.echo().lines() {
        writeln!(out, "# {line}")?;
    }
    let mut w = csv::Writer::from_writer(&mut *out);
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    w.flush()?;
    drop(w);
    out.flush()?;
    Ok(())
}

/// Writes `{command, options, config, ..body}` as pretty JSON.
pub fn write_json(
    out: &mut dyn Write,
    command: &str,
    options: &impl Serialize,
    config: &Config,
    body: Value,
) -> Result<(), CliError> {
    let mut doc = serde_json::Map::new();
    doc.insert("command".into(), Value::from(command));
    doc.insert("options".into(), serde_json::to_value(options)?);
    doc.insert("config".into(), serde_json::to_value(config)?);
    if let Value::Object(fields) = body {
        doc.extend(fields);
    }
    serde_json::to_writer_pretty(&mut *out, &Value::Object(doc))?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

/// JSON number, or null for non-finite values.
pub fn json_num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}
