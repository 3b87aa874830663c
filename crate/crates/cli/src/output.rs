use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use clap::ValueEnum;
use serde::Serialize;
use serde_json::Value;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Default)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Opens `--out` or falls back to stdout. Failure to create the file is exit code 4.
pub fn sink(out: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    match out {
        Some(p) => File::create(p)
            .map(|f| Box::new(BufWriter::new(f)) as Box<dyn Write>)
            .map_err(|e| CliError::unwritable(p, e)),
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
    }
}

pub fn csv_number(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        String::new()
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => match n.as_i64() {
            Some(i) if !n.is_f64() => i.to_string(),
            _ => csv_number(n.as_f64().unwrap_or(f64::NAN)),
        },
        Value::String(s) => quote(s),
        Value::Array(a) if a.iter().all(|x| x.is_i64()) => quote(
            &a.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";"),
        ),
        other => quote(&other.to_string()),
    }
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Nested objects become dotted column names.
fn flatten(v: &Value) -> Vec<(String, Value)> {
    fn walk(prefix: &str, v: &Value, out: &mut Vec<(String, Value)>) {
        match v {
            Value::Object(map) => {
                for (k, x) in map {
                    let name = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    walk(&name, x, out);
                }
            }
            other => out.push((prefix.to_string(), other.clone())),
        }
    }
    let mut out = Vec::new();
    walk("", v, &mut out);
    out
}

/// Writes `value` as pretty JSON, or as CSV: an array of objects becomes one
/// row per element, a single object one row.
pub fn emit<T: Serialize>(value: &T, format: Format, out: &mut dyn Write) -> Result<(), CliError> {
    let v = serde_json::to_value(value).map_err(|e| CliError::internal(e.to_string()))?;
    let mut text = String::new();
    match format {
        Format::Json => {
            text = serde_json::to_string_pretty(&v).map_err(|e| CliError::internal(e.to_string()))?;
            text.push('\n');
        }
        Format::Csv => {
            let rows: Vec<Vec<(String, Value)>> = match &v {
                Value::Array(items) => items.iter().map(flatten).collect(),
                Value::Object(_) => vec![flatten(&v)],
                _ => Vec::new(),
            };
            if let Some(first) = rows.first() {
                let keys: Vec<&str> = first.iter().map(|(k, _)| k.as_str()).collect();
                text.push_str(&keys.join(","));
                text.push('\n');
                for row in &rows {
                    let cells: Vec<String> = row.iter().map(|(_, v)| cell(v)).collect();
                    text.push_str(&cells.join(","));
                    text.push('\n');
                }
            }
        }
    }
    out.write_all(text.as_bytes()).map_err(CliError::write)?;
    out.flush().map_err(CliError::write)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn csv(v: &Value) -> String {
        let mut buf = Vec::new();
        emit(v, Format::Csv, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23] {
            assert_eq!(csv_number(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(csv_number(f64::INFINITY), "");
        assert_eq!(csv_number(f64::NAN), "");
    }

    #[test]
    fn nested_objects_flatten() {
        let v = serde_json::json!([
            {"a": 1, "b": {"value": 0.5, "divergent": false}, "c": "x,y"},
            {"a": 2, "b": {"value": null, "divergent": true}, "c": "z"}
        ]);
        let text = csv(&v);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "a,b.divergent,b.value,c");
        assert_eq!(lines[1], "1,false,5.0000000000000000e-1,\"x,y\"");
        assert_eq!(lines[2], "2,true,,z");
    }

    #[test]
    fn integer_arrays_join() {
        let v = serde_json::json!({"index": [1, -2], "quote": "say \"hi\""});
        assert_eq!(csv(&v).lines().nth(1).unwrap(), "1;-2,\"say \"\"hi\"\"\"");
    }
}
