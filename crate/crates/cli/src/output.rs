//! Report rendering: JSON with 17 significant digits, and a flat CSV view.

use std::fmt::Write;

use num_complex::Complex64;
use serde_json::{Map, Value};

pub const SCHEMA: &str = "treeschur/1";

/// A float as a JSON value; non-finite values become strings.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x)
        .map(Value::Number)
        .unwrap_or_else(|| Value::String(if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() }))
}

pub fn cnum(z: Complex64) -> Value {
    let mut m = Map::new();
    m.insert("re".into(), num(z.re));
    m.insert("im".into(), num(z.im));
    Value::Object(m)
}

fn fmt_float(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0.0".into() } else { "0.0".into() };
    }
    format!("{x:.16e}")
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                let _ = write!(out, "{i}");
            } else if let Some(u) = n.as_u64() {
                let _ = write!(out, "{u}");
            } else {
                out.push_str(&fmt_float(n.as_f64().unwrap_or(f64::NAN)));
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("string serializes")),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (k, item) in items.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                write_value(out, item, indent + 1);
                out.push_str(if k + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            for (k, (key, item)) in map.iter().enumerate() {
                out.push_str(&pad(indent + 1));
                out.push_str(&serde_json::to_string(key).expect("key serializes"));
                out.push_str(": ");
                write_value(out, item, indent + 1);
                out.push_str(if k + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(indent));
            out.push('}');
        }
    }
}

pub fn to_json(v: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, v, 0);
    out.push('\n');
    out
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Number(n) if n.as_i64().is_none() && n.as_u64().is_none() => fmt_float(n.as_f64().unwrap_or(f64::NAN)),
        Value::String(s) => csv_escape(s),
        other => csv_escape(&other.to_string()),
    }
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(map) => {
            for (k, item) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, item, out);
            }
        }
        Value::Array(items) => {
            for (k, item) in items.iter().enumerate() {
                flatten(&format!("{prefix}.{k}"), item, out);
            }
        }
        other => out.push((prefix.to_string(), scalar(other))),
    }
}

/// A `rows` array of objects becomes a table; anything else a `field,value` list.
pub fn to_csv(report: &Value) -> String {
    let results = report.get("results").unwrap_or(&Value::Null);
    if let Some(Value::Array(rows)) = results.get("rows") {
        let mut header: Vec<(String, String)> = Vec::new();
        if let Some(first) = rows.first() {
            flatten("", first, &mut header);
        }
        let cols: Vec<String> = header.into_iter().map(|(k, _)| k).collect();
        let mut out = cols.join(",");
        out.push('\n');
        for row in rows {
            let mut cells = Vec::new();
            flatten("", row, &mut cells);
            let line: Vec<String> = cols
                .iter()
                .map(|c| cells.iter().find(|(k, _)| k == c).map(|(_, v)| v.clone()).unwrap_or_default())
                .collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        return out;
    }
    let mut cells = Vec::new();
    flatten("", report, &mut cells);
    let mut out = String::from("field,value\n");
    for (k, v) in cells {
        let _ = writeln!(out, "{},{}", csv_escape(&k), v);
    }
    out
}
