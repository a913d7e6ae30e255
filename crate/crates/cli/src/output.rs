//! JSON and CSV rendering with the provenance envelope.

use serde_json::{json, Value};

use crate::CliError;

/// Tabular form of a result.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    /// Two columns `key,value` from the scalar fields of a JSON object.
    pub fn key_value(v: &Value) -> Self {
        let mut t = Table::new(&["key", "value"]);
        if let Value::Object(map) = v {
            for (k, x) in map {
                match x {
                    Value::Object(_) => {}
                    Value::Array(items) if items.iter().any(|i| i.is_object() || i.is_array()) => {}
                    _ => t.rows.push(vec![k.clone(), cell(x)]),
                }
            }
        }
        t
    }
}

/// A scalar rendered for CSV; arrays are joined with `;`.
pub fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Array(items) => items.iter().map(cell).collect::<Vec<_>>().join(";"),
        other => other.to_string(),
    }
}

/// Shortest round-trip decimal, switching to exponent form outside `[1e-4, 1e15)`.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if !x.is_finite() || x == 0.0 || (1e-4..1e15).contains(&a) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

pub struct Output {
    pub result: Value,
    pub table: Table,
    /// Extra `key=value` facts for the CSV preamble.
    pub notes: Vec<(String, String)>,
    pub summary: String,
}

pub struct Envelope<'a> {
    pub command: &'a str,
    pub version: &'a str,
    pub config_hash: &'a str,
    pub config: Value,
}

pub fn render_json(env: &Envelope, out: &Output) -> Result<String, CliError> {
    let doc = json!({
        "tool": "petersson",
        "version": env.version,
        "command": env.command,
        "config_hash": env.config_hash,
        "config": env.config,
        "result": out.result,
    });
    serde_json::to_string_pretty(&doc).map(|s| s + "\n").map_err(|e| CliError::validation(e.to_string()))
}

pub fn render_csv(env: &Envelope, out: &Output) -> Result<String, CliError> {
    let mut s = format!("# petersson {} command={} config_hash={}\n", env.version, env.command, env.config_hash);
    for (k, v) in &out.notes {
        s.push_str(&format!("# {k}={v}\n"));
    }
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    let io = |e: csv::Error| CliError::validation(e.to_string());
    w.write_record(&out.table.header).map_err(io)?;
    for r in &out.table.rows {
        w.write_record(r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::validation(e.to_string()))?;
    s.push_str(&String::from_utf8_lossy(&bytes));
    Ok(s)
}
