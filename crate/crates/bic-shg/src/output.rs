//! CSV/JSON emission with the `bic-shg schema v1` contract.
//!
//! CSV rows print floating-point values with 12 significant digits; `#`
//! lines carry the schema tag and the echoed inputs, so a run is fully
//! reproducible from its own output.

use num_complex::Complex64;
use serde::Serializer;
use std::fmt::Write as _;

pub const SCHEMA: &str = "bic-shg schema v1";

/// 12-significant-digit rendering used in every CSV cell.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    format!("{x:.11e}")
}

pub fn ser_complex<S: Serializer>(c: &Complex64, s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(2))?;
    seq.serialize_element(&c.re)?;
    seq.serialize_element(&c.im)?;
    seq.end()
}

/// A table with metadata header, assembled deterministically.
#[derive(Debug, Clone)]
pub struct Table {
    pub command: String,
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(command: &str, columns: &[&str]) -> Self {
        Self {
            command: command.to_string(),
            meta: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl std::fmt::Display) {
        self.meta.push((key.to_string(), value.to_string()));
    }

    pub fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# {SCHEMA}");
        let _ = writeln!(out, "# command = {}", self.command);
        for (k, v) in &self.meta {
            let _ = writeln!(out, "# {k} = {v}");
        }
        let _ = writeln!(out, "{}", self.columns.join(","));
        for row in &self.rows {
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = serde_json::Map::new();
                for (col, cell) in self.columns.iter().zip(row) {
                    let value = cell
                        .parse::<f64>()
                        .map(|x| {
                            serde_json::Number::from_f64(x)
                                .map(serde_json::Value::Number)
                                .unwrap_or(serde_json::Value::String(cell.clone()))
                        })
                        .unwrap_or(serde_json::Value::String(cell.clone()));
                    obj.insert(col.clone(), value);
                }
                serde_json::Value::Object(obj)
            })
            .collect();
        let meta: serde_json::Map<String, serde_json::Value> = self
            .meta
            .iter()
            .map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone())))
            .collect();
        serde_json::to_string_pretty(&serde_json::json!({
            "schema": SCHEMA,
            "command": self.command,
            "meta": meta,
            "rows": rows,
        }))
        .expect("table serializes")
    }
}
