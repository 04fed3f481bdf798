//! `--output text` prints every leaf of the JSON value as `path = value`,
//! so both formats carry the same information.

use clap::ValueEnum;
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

impl Format {
    pub fn render(self, v: &Value) -> String {
        match self {
            Format::Json => v.to_string(),
            Format::Text => {
                let mut lines = Vec::new();
                flatten("", v, &mut lines);
                lines.push(String::new());
                lines.join("\n")
            }
        }
    }
}

fn flatten(path: &str, v: &Value, out: &mut Vec<String>) {
    let join = |key: &str| if path.is_empty() { key.to_string() } else { format!("{path}.{key}") };
    match v {
        Value::Object(m) if !m.is_empty() => m.iter().for_each(|(k, v)| flatten(&join(k), v, out)),
        Value::Array(a) if !a.is_empty() => {
            a.iter().enumerate().for_each(|(i, v)| flatten(&join(&i.to_string()), v, out))
        }
        Value::String(s) => out.push(format!("{} = {s}", display_path(path))),
        other => out.push(format!("{} = {other}", display_path(path))),
    }
}

fn display_path(path: &str) -> &str {
    if path.is_empty() {
        "value"
    } else {
        path
    }
}
