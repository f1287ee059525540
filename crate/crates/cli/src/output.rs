//! Output rendering: CSV with `#` headers carrying the resolved configuration and its hash,
//! or JSON with keys in sorted order.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Rows of a CSV body. Rows may be ragged (point configurations).
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// Extra `#` lines such as units or warnings.
    pub notes: Vec<String>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), ..Table::default() }
    }

    pub fn push<I: IntoIterator<Item = String>>(&mut self, row: I) {
        self.rows.push(row.into_iter().collect());
    }
}

/// Result of one command in both renderings.
pub struct Emit {
    pub json: Value,
    pub table: Table,
    /// Rendering used when `--format` is absent.
    pub default: Format,
}

/// Floats are written with round-trip precision.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

/// Rebuilds every object with sorted keys, so the order is stable whatever map type serde_json uses.
pub fn canonical(v: Value) -> Value {
    match v {
        Value::Object(m) => {
            let mut entries: Vec<(String, Value)> = m.into_iter().collect();
            entries.sort_by(|a, b| a.0.cmp(&b.0));
            let mut out = Map::new();
            for (k, v) in entries {
                out.insert(k, canonical(v));
            }
            Value::Object(out)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(canonical).collect()),
        other => other,
    }
}

/// Hex SHA-256 of the canonical compact JSON of `config`.
pub fn config_hash(config: &Value) -> String {
    let text = serde_json::to_string(&canonical(config.clone())).expect("config serializes");
    hex::encode(Sha256::digest(text.as_bytes()))
}

pub fn render(emit: &Emit, config: &Value, format: Option<Format>) -> String {
    let config = canonical(config.clone());
    let hash = config_hash(&config);
    match format.unwrap_or(emit.default) {
        Format::Json => {
            // object results sit beside the provenance keys; anything else goes under "result"
            let mut root = match &emit.json {
                Value::Object(m) if !m.contains_key("config") && !m.contains_key("config_sha256") => m.clone(),
                other => Map::from_iter([("result".to_string(), other.clone())]),
            };
            root.insert("config".into(), config);
            root.insert("config_sha256".into(), Value::String(hash));
            let mut s = serde_json::to_string_pretty(&canonical(Value::Object(root))).expect("json renders");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut s = String::new();
            s.push_str(&format!("# fermibox {}\n", env!("CARGO_PKG_VERSION")));
            s.push_str(&format!("# config: {}\n", serde_json::to_string(&config).expect("config renders")));
            s.push_str(&format!("# config_sha256: {hash}\n"));
            for n in &emit.table.notes {
                s.push_str(&format!("# {n}\n"));
            }
            s.push_str(&emit.table.columns.join(","));
            s.push('\n');
            for r in &emit.table.rows {
                s.push_str(&r.join(","));
                s.push('\n');
            }
            s
        }
    }
}

pub fn write(text: &str, out: &Option<PathBuf>) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut o = std::io::stdout().lock();
            o.write_all(text.as_bytes()).map_err(|e| Failure::Usage(format!("cannot write to stdout: {e}")))
        }
    }
}
