//! Machine-readable output: versioned JSON with pinned float formatting, and CSV tables.

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::kernel::{SolitonConfig, Variant};

pub const SCHEMA: &str = "soliton-pole-lab/1";

/// Seventeen significant digits in exponent form; non-finite values as `null`.
pub fn format_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "null".into()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConfigEcho {
    pub k1: f64,
    pub k2: f64,
    pub variant: Variant,
    pub x1: f64,
    pub x2: f64,
    /// `"p/q"` wavenumbers when running in exact mode.
    pub exact: Option<(String, String)>,
}

impl From<&SolitonConfig> for ConfigEcho {
    fn from(cfg: &SolitonConfig) -> Self {
        Self {
            k1: cfg.k1(),
            k2: cfg.k2(),
            variant: cfg.variant(),
            x1: cfg.x1(),
            x2: cfg.x2(),
            exact: cfg.exact_wavenumbers().map(|(a, b)| (a.to_string(), b.to_string())),
        }
    }
}

/// Top-level JSON document; keys appear in declaration order.
#[derive(Clone, Debug, Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub schema: &'static str,
    pub command: &'a str,
    pub config: Option<ConfigEcho>,
    pub seed: Option<u64>,
    pub result: &'a T,
}

impl<'a, T: Serialize> Envelope<'a, T> {
    pub fn new(command: &'a str, cfg: Option<&SolitonConfig>, seed: Option<u64>, result: &'a T) -> Self {
        Self {
            schema: SCHEMA,
            command,
            config: cfg.map(ConfigEcho::from),
            seed,
            result,
        }
    }
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => match (n.as_i64(), n.as_u64()) {
            (Some(i), _) if !n.is_f64() => out.push_str(&i.to_string()),
            (_, Some(u)) if !n.is_f64() => out.push_str(&u.to_string()),
            _ => out.push_str(&format_float(n.as_f64().unwrap_or(f64::NAN))),
        },
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) if items.is_empty() => out.push_str("[]"),
        Value::Array(items) => {
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_value(out, item, indent + 1);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(map) if map.is_empty() => out.push_str("{}"),
        Value::Object(map) => {
            out.push_str("{\n");
            for (i, (k, item)) in map.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&Value::String(k.clone()).to_string());
                out.push_str(": ");
                write_value(out, item, indent + 1);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
    }
}

/// Pretty JSON with every float written by [`format_float`].
pub fn to_json<T: Serialize>(doc: &T) -> Result<String> {
    let value = serde_json::to_value(doc).map_err(|e| Error::Report(e.to_string()))?;
    let mut out = String::new();
    write_value(&mut out, &value, 0);
    out.push('\n');
    Ok(out)
}

/// A CSV table with a mandatory header row.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| Error::Report(e.to_string());
        w.write_record(&self.header).map_err(err)?;
        for row in &self.rows {
            w.write_record(row).map_err(err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Report(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Report(e.to_string()))
    }
}
