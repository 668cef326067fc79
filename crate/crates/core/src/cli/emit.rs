//! Byte-stable report files.
//!
//! JSON is written by hand from a captured serde tree so that every float has
//! the same shape: 17 significant digits in exponent form, with non-finite
//! values spelled as the strings `"inf"`, `"-inf"` and `"nan"`. Object keys
//! come out sorted. CSV uses LF line endings and a header row. Files are
//! written to a temporary name and renamed into place.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_value::Value;

use crate::error::{Result, SimError};

/// Fixed float format shared by JSON and CSV.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:.16e}")
    }
}

fn json_string(out: &mut String, s: &str) {
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
}

fn json_float(out: &mut String, x: f64) {
    if x.is_finite() {
        out.push_str(&fmt_f64(x));
    } else {
        json_string(out, &fmt_f64(x));
    }
}

fn key_text(k: &Value) -> String {
    match k {
        Value::String(s) => s.clone(),
        Value::Char(c) => c.to_string(),
        other => format!("{other:?}"),
    }
}

fn indent(out: &mut String, level: usize) {
    out.push('\n');
    for _ in 0..level {
        out.push_str("  ");
    }
}

fn write_value(out: &mut String, v: &Value, level: usize) {
    match v {
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::U8(x) => out.push_str(&x.to_string()),
        Value::U16(x) => out.push_str(&x.to_string()),
        Value::U32(x) => out.push_str(&x.to_string()),
        Value::U64(x) => out.push_str(&x.to_string()),
        Value::I8(x) => out.push_str(&x.to_string()),
        Value::I16(x) => out.push_str(&x.to_string()),
        Value::I32(x) => out.push_str(&x.to_string()),
        Value::I64(x) => out.push_str(&x.to_string()),
        Value::F32(x) => json_float(out, *x as f64),
        Value::F64(x) => json_float(out, *x),
        Value::Char(c) => json_string(out, &c.to_string()),
        Value::String(s) => json_string(out, s),
        Value::Unit => out.push_str("null"),
        Value::Option(None) => out.push_str("null"),
        Value::Option(Some(inner)) | Value::Newtype(inner) => write_value(out, inner, level),
        Value::Seq(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            // Flat numeric rows stay on one line; they are the bulk of matrix output.
            let scalar = items.iter().all(|x| {
                matches!(
                    x,
                    Value::F64(_) | Value::F32(_) | Value::U64(_) | Value::I64(_) | Value::Bool(_)
                )
            });
            out.push('[');
            for (i, x) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                if scalar {
                    if i > 0 {
                        out.push(' ');
                    }
                } else {
                    indent(out, level + 1);
                }
                write_value(out, x, level + 1);
            }
            if !scalar {
                indent(out, level);
            }
            out.push(']');
        }
        Value::Map(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push('{');
            for (i, (k, x)) in map.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                indent(out, level + 1);
                json_string(out, &key_text(k));
                out.push_str(": ");
                write_value(out, x, level + 1);
            }
            indent(out, level);
            out.push('}');
        }
        Value::Bytes(b) => {
            let items: Vec<Value> = b.iter().map(|&x| Value::U8(x)).collect();
            write_value(out, &Value::Seq(items), level);
        }
    }
}

/// Pretty JSON with the fixed float format and a trailing newline.
pub fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let value =
        serde_value::to_value(v).map_err(|e| SimError::Parse(format!("serialisation: {e}")))?;
    let mut out = String::new();
    write_value(&mut out, &value, 0);
    out.push('\n');
    Ok(out)
}

/// A CSV cell.
pub enum Cell {
    Num(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => fmt_f64(*x),
            Cell::Text(s) if s.contains([',', '"', '\n']) => {
                format!("\"{}\"", s.replace('"', "\"\""))
            }
            Cell::Text(s) => s.clone(),
        }
    }
}

/// CSV text with a header row and LF endings.
pub fn to_csv(header: &[&str], rows: &[Vec<Cell>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.iter().map(Cell::render).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}

/// Writes `contents` to `dir/name` through a temporary file and a rename.
pub fn write_atomic(dir: &Path, name: &str, contents: &str) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| SimError::Io(format!("{}: {e}", dir.display())))?;
    let tmp = dir.join(format!(".{name}.tmp"));
    let dst = dir.join(name);
    std::fs::write(&tmp, contents).map_err(|e| SimError::Io(format!("{}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, &dst).map_err(|e| SimError::Io(format!("{}: {e}", dst.display())))?;
    Ok(())
}
