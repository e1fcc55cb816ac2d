//! Deterministic text emission: `%.12g` numbers, canonical JSON, CSV.

use std::fmt::Write as _;

use serde_json::Value;

/// Formats like C's `%.12g`; non-finite values become `nan`, `inf`, `-inf`.
pub fn fmt_g(x: f64) -> String {
    const PRECISION: i32 = 12;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", (PRECISION - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..PRECISION).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    } else {
        let decimals = (PRECISION - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Canonical JSON: sorted keys, two-space indent, `%.12g` floats, non-finite
/// floats as `null`.
pub fn canonical_json(value: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, value, 0);
    out.push('\n');
    out
}

fn write_value(out: &mut String, value: &Value, depth: usize) {
    let pad = |n: usize| "  ".repeat(n);
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                let x = n.as_f64().unwrap_or(f64::NAN);
                if x.is_finite() {
                    out.push_str(&fmt_g(x));
                } else {
                    out.push_str("null");
                }
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (k, item) in items.iter().enumerate() {
                out.push_str(&pad(depth + 1));
                write_value(out, item, depth + 1);
                out.push_str(if k + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(depth));
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (k, key) in keys.iter().enumerate() {
                let _ = write!(out, "{}{}: ", pad(depth + 1), Value::String((*key).clone()));
                write_value(out, &map[*key], depth + 1);
                out.push_str(if k + 1 < keys.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(depth));
            out.push('}');
        }
    }
}

/// A header row followed by rows of cells.
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

pub enum Cell {
    Num(f64),
    Text(String),
}

impl Table {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        Table {
            header: header.iter().map(|h| h.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Num(x) => fmt_g(*x),
                    Cell::Text(s) => s.clone(),
                })
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// Array of objects keyed by the header.
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let map = self
                        .header
                        .iter()
                        .zip(row)
                        .map(|(h, c)| {
                            let v = match c {
                                Cell::Num(x) => serde_json::Number::from_f64(*x).map_or(Value::Null, Value::Number),
                                Cell::Text(s) => Value::String(s.clone()),
                            };
                            (h.clone(), v)
                        })
                        .collect();
                    Value::Object(map)
                })
                .collect(),
        )
    }
}

/// One-row table from a JSON object, nested keys joined with `.`.
pub fn flatten_record(value: &Value) -> Table {
    fn walk(prefix: &str, v: &Value, out: &mut Vec<(String, Cell)>) {
        match v {
            Value::Object(map) => {
                let mut keys: Vec<&String> = map.keys().collect();
                keys.sort();
                for k in keys {
                    let name = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    walk(&name, &map[k], out);
                }
            }
            Value::Number(n) => out.push((prefix.to_string(), Cell::Num(n.as_f64().unwrap_or(f64::NAN)))),
            Value::Null => out.push((prefix.to_string(), Cell::Text(String::new()))),
            Value::Bool(b) => out.push((prefix.to_string(), Cell::Text(b.to_string()))),
            Value::String(s) => out.push((prefix.to_string(), Cell::Text(s.clone()))),
            Value::Array(items) => {
                for (k, item) in items.iter().enumerate() {
                    walk(&format!("{prefix}.{k}"), item, out);
                }
            }
        }
    }
    let mut cells = Vec::new();
    walk("", value, &mut cells);
    let header: Vec<String> = cells.iter().map(|c| c.0.clone()).collect();
    let mut table = Table::new(&header);
    table.push(cells.into_iter().map(|c| c.1).collect());
    table
}
