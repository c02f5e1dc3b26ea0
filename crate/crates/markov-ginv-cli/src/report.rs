//! Report assembly and rendering.
//!
//! Every report carries the same top-level shape:
//! `{input_digest, command, route, tolerances, results, residuals, ...}`.

use markov_ginv::{Matrix, Vector};
use serde_json::{json, Map, Value};

pub fn matrix_json(m: &Matrix) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|i| Value::Array(m.row(i).iter().map(|&x| json!(x)).collect()))
            .collect(),
    )
}

pub fn vector_json(v: &Vector) -> Value {
    Value::Array(v.iter().map(|&x| json!(x)).collect())
}

pub struct ReportBuilder {
    root: Map<String, Value>,
}

impl ReportBuilder {
    pub fn new(command: &str, digest: &str, m: usize, normalized: bool) -> Self {
        let mut root = Map::new();
        root.insert("command".into(), json!(command));
        root.insert("input_digest".into(), json!(digest));
        root.insert("m".into(), json!(m));
        root.insert("normalized".into(), json!(normalized));
        ReportBuilder { root }
    }

    pub fn set(&mut self, key: &str, value: Value) -> &mut Self {
        self.root.insert(key.into(), value);
        self
    }

    pub fn finish(self) -> Value {
        Value::Object(self.root)
    }
}

fn render_value(key: &str, value: &Value, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    match value {
        Value::Array(rows) if rows.iter().all(|r| r.is_array()) && !rows.is_empty() => {
            out.push_str(&format!("{pad}{key}:\n"));
            for row in rows {
                let cells: Vec<String> = row
                    .as_array()
                    .unwrap()
                    .iter()
                    .map(|x| format!("{:>12.6}", x.as_f64().unwrap_or(f64::NAN)))
                    .collect();
                out.push_str(&format!("{pad}  {}\n", cells.join(" ")));
            }
        }
        Value::Array(items) if items.iter().all(|x| x.is_number()) => {
            let cells: Vec<String> = items
                .iter()
                .map(|x| format!("{:.6}", x.as_f64().unwrap_or(f64::NAN)))
                .collect();
            out.push_str(&format!("{pad}{key}: [{}]\n", cells.join(", ")));
        }
        Value::Object(map) => {
            out.push_str(&format!("{pad}{key}:\n"));
            for (k, v) in map {
                render_value(k, v, indent + 1, out);
            }
        }
        other => {
            out.push_str(&format!("{pad}{key}: {other}\n"));
        }
    }
}

/// Plain-text rendering of a report for `--output table`.
pub fn render_table(report: &Value) -> String {
    let mut out = String::new();
    if let Value::Object(map) = report {
        for (k, v) in map {
            render_value(k, v, 0, &mut out);
        }
    }
    out
}
