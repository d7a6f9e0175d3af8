use serde_json::{json, Map, Value};

use crate::config::{OutputFormat, RunConfig};

/// Result of one subcommand before rendering.
pub struct Outcome {
    pub result: Value,
    pub passed: bool,
    /// Exit code used when `passed` is false.
    pub failure_code: u8,
}

impl Outcome {
    pub fn ok(result: Value) -> Self {
        Outcome {
            result,
            passed: true,
            failure_code: 0,
        }
    }
}

pub fn envelope(command: &str, cfg: &RunConfig, result: &Value) -> Value {
    json!({ "command": command, "config": cfg, "result": result })
}

pub fn render(command: &str, cfg: &RunConfig, result: &Value, format: OutputFormat) -> String {
    let doc = envelope(command, cfg, result);
    match format {
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(&doc).expect("reports serialize");
            s.push('\n');
            s
        }
        OutputFormat::Text => to_text(&doc),
    }
}

/// Aligned `path  value` lines; matrices print one row per line.
pub fn to_text(doc: &Value) -> String {
    let mut rows: Vec<(String, String)> = Vec::new();
    flatten("", doc, &mut rows);
    let width = rows
        .iter()
        .map(|(k, _)| k.chars().count())
        .max()
        .unwrap_or(0);
    let mut out = String::new();
    for (k, v) in rows {
        let pad = width - k.chars().count();
        let mut lines = v.lines();
        out.push_str(&format!(
            "{k}{}  {}\n",
            " ".repeat(pad),
            lines.next().unwrap_or("")
        ));
        for l in lines {
            out.push_str(&format!("{}  {l}\n", " ".repeat(width)));
        }
    }
    out
}

fn join(prefix: &str, key: &str) -> String {
    if prefix.is_empty() {
        key.to_string()
    } else {
        format!("{prefix}.{key}")
    }
}

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<(String, String)>) {
    match v {
        Value::Object(map) if is_matrix(map) => rows.push((prefix.to_string(), matrix_text(map))),
        Value::Object(map) => {
            for (k, x) in map {
                flatten(&join(prefix, k), x, rows);
            }
        }
        Value::Array(items) if items.iter().all(is_scalar_like) => {
            let parts: Vec<String> = items.iter().map(scalar_text).collect();
            rows.push((prefix.to_string(), format!("[{}]", parts.join(", "))));
        }
        Value::Array(items) => {
            for (i, x) in items.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), x, rows);
            }
        }
        _ => rows.push((prefix.to_string(), scalar_text(v))),
    }
}

fn is_scalar_like(v: &Value) -> bool {
    match v {
        Value::Array(xs) => xs.len() <= 4 && xs.iter().all(|x| !x.is_array() && !x.is_object()),
        Value::Object(_) => false,
        _ => true,
    }
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        Value::Array(xs) => format!(
            "[{}]",
            xs.iter().map(scalar_text).collect::<Vec<_>>().join(", ")
        ),
        other => other.to_string(),
    }
}

fn is_matrix(map: &Map<String, Value>) -> bool {
    map.len() == 3
        && map.contains_key("rows")
        && map.contains_key("cols")
        && map.contains_key("data")
}

fn complex_text(z: &Value) -> String {
    let re = z.get(0).and_then(Value::as_f64).unwrap_or(f64::NAN);
    let im = z.get(1).and_then(Value::as_f64).unwrap_or(f64::NAN);
    if im == 0.0 {
        format!("{re:.6}")
    } else {
        format!("{re:.6}{im:+.6}i")
    }
}

fn matrix_text(map: &Map<String, Value>) -> String {
    let cols = map["cols"].as_u64().unwrap_or(0) as usize;
    let rows = map["rows"].as_u64().unwrap_or(0) as usize;
    let data = map["data"].as_array().cloned().unwrap_or_default();
    let cells: Vec<String> = data.iter().map(complex_text).collect();
    let w = cells.iter().map(String::len).max().unwrap_or(0);
    let mut s = format!("{rows}x{cols} matrix");
    for r in 0..rows {
        s.push('\n');
        let line: Vec<String> = (0..cols)
            .filter_map(|c| cells.get(r * cols + c))
            .map(|x| format!("{x:>w$}"))
            .collect();
        s.push_str(&line.join("  "));
    }
    s
}
