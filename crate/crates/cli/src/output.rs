//! Output: 12 significant digits everywhere, to a file or stdout.

use crate::CliError;
use serde_json::Value;
use std::io::Write;
use std::path::Path;

pub enum Output {
    Json(Value),
    Text(String),
}

/// `x` rounded to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

/// Plain decimal with at most 12 significant digits.
pub fn fmt12(x: f64) -> String {
    format!("{}", round12(x))
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            *v = serde_json::Number::from_f64(round12(n.as_f64().unwrap())).map_or(Value::Null, Value::Number);
        }
        Value::Array(a) => a.iter_mut().for_each(round_value),
        Value::Object(o) => o.values_mut().for_each(round_value),
        _ => {}
    }
}

pub fn to_json<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serialisable output")
}

pub fn render(out: Output) -> String {
    match out {
        Output::Json(mut v) => {
            round_value(&mut v);
            let mut s = serde_json::to_string_pretty(&v).expect("serialisable output");
            s.push('\n');
            s
        }
        Output::Text(s) => s,
    }
}

pub fn write(text: &str, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::io(Path::new("<stdout>"), e))
        }
    }
}

/// A header line and rows, comma separated.
pub fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    s
}
