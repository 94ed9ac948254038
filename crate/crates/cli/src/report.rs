//! Report schema and output formats.

use std::fmt::Write as _;

use clap::ValueEnum;
use pbn_phi::{Normalization, Partition, PartitionEntry};
use serde::Serialize;
use serde_json::{Map, Number, Value};

/// Significant digits kept for every real number in a report.
pub const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

/// Output of one command. Fields that do not apply to a command are null;
/// command-specific payloads go under `data`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub network_hash: String,
    pub time: Option<usize>,
    pub prior: Option<String>,
    pub state: Option<String>,
    pub value_bits: Option<f64>,
    pub mip: Option<Partition>,
    pub per_partition: Option<Vec<PartitionEntry>>,
    pub normalization_mode: Option<Normalization>,
    pub warnings: Vec<String>,
    pub data: Value,
}

impl Report {
    pub fn new(command: &str, network_hash: String) -> Self {
        Self {
            command: command.into(),
            network_hash,
            time: None,
            prior: None,
            state: None,
            value_bits: None,
            mip: None,
            per_partition: None,
            normalization_mode: None,
            warnings: Vec::new(),
            data: Value::Null,
        }
    }

    /// The report as JSON with every real rounded to
    /// [`SIGNIFICANT_DIGITS`] digits.
    pub fn to_value(&self) -> Value {
        let mut value = serde_json::to_value(self).expect("reports serialize");
        round_numbers(&mut value);
        value
    }

    pub fn render(&self, format: Format) -> String {
        let value = self.to_value();
        match format {
            Format::Json => {
                let mut out = serde_json::to_string_pretty(&value).expect("reports serialize");
                out.push('\n');
                out
            }
            Format::Csv => render_csv(&value),
            Format::Table => render_table(&value),
        }
    }
}

pub fn round_significant(v: f64) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v)
        .parse()
        .expect("formatted float parses")
}

fn round_numbers(value: &mut Value) {
    match value {
        Value::Number(n) if n.is_f64() => {
            let v = round_significant(n.as_f64().unwrap());
            if let Some(r) = Number::from_f64(v) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_numbers),
        Value::Object(map) => map.values_mut().for_each(round_numbers),
        _ => {}
    }
}

fn is_partition(value: &Value) -> bool {
    matches!(value, Value::Array(parts) if !parts.is_empty() && parts.iter().all(|p| {
        matches!(p, Value::Array(ids) if ids.iter().all(Value::is_u64))
    }))
}

fn braces(value: &Value) -> String {
    match value {
        Value::Array(items) => {
            let inner: Vec<String> = items.iter().map(braces).collect();
            format!("{{{}}}", inner.join(","))
        }
        other => scalar(other),
    }
}

fn scalar(value: &Value) -> String {
    match value {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn is_number_row(value: &Value) -> bool {
    matches!(value, Value::Array(items) if items.iter().all(|v| v.is_number()))
}

/// Flattens a report into `(path, text)` pairs. Partitions print as
/// `{{1},{2}}`, arrays of numbers as space-separated rows.
fn flatten(prefix: &str, value: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match value {
        Value::Object(map) => flatten_map(prefix, map, out),
        Value::Array(_) if is_partition(value) => out.push((prefix.to_string(), braces(value))),
        Value::Array(items) if is_number_row(value) => {
            let row: Vec<String> = items.iter().map(scalar).collect();
            out.push((prefix.to_string(), row.join(" ")));
        }
        Value::Array(items) => {
            for (i, item) in items.iter().enumerate() {
                flatten(&key(&i.to_string()), item, out);
            }
            if items.is_empty() {
                out.push((prefix.to_string(), String::new()));
            }
        }
        other => out.push((prefix.to_string(), scalar(other))),
    }
}

fn flatten_map(prefix: &str, map: &Map<String, Value>, out: &mut Vec<(String, String)>) {
    for (k, v) in map {
        let path = if prefix.is_empty() {
            k.clone()
        } else {
            format!("{prefix}.{k}")
        };
        flatten(&path, v, out);
    }
}

fn report_fields(value: &Value) -> Vec<(String, String)> {
    let mut out = Vec::new();
    flatten("", value, &mut out);
    out
}

fn csv_field(text: &str) -> String {
    if text.contains([',', '"', '\n']) {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_string()
    }
}

fn render_csv(value: &Value) -> String {
    let mut out = String::from("field,value\n");
    for (k, v) in report_fields(value) {
        let _ = writeln!(out, "{},{}", csv_field(&k), csv_field(&v));
    }
    out
}

fn render_table(value: &Value) -> String {
    let fields = report_fields(value);
    let width = fields.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut out = String::new();
    for (k, v) in fields {
        let _ = writeln!(out, "{k:<width$}  {v}");
    }
    out
}
