//! Deterministic JSON/CSV emission and atomic file writes.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use jcg_core::Complex64 as C64;
use serde_json::{json, Value};

/// Floats carry 17 significant digits; integers stay integers; non-finite
/// values become null.
pub fn fmt_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".into()
    }
}

pub fn cx(z: C64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

pub fn cx_list(v: &[C64]) -> Value {
    Value::Array(v.iter().map(|&z| cx(z)).collect())
}

fn write_value(out: &mut String, v: &Value, indent: usize) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => match (n.as_i64(), n.as_u64(), n.as_f64()) {
            (Some(i), _, _) => write!(out, "{i}").unwrap(),
            (_, Some(u), _) => write!(out, "{u}").unwrap(),
            (_, _, Some(f)) => out.push_str(&fmt_float(f)),
            _ => out.push_str("null"),
        },
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            // short numeric rows stay on one line
            let flat = items.iter().all(|x| x.is_number() || x.is_null()) && items.len() <= 4;
            out.push('[');
            for (i, x) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                if flat {
                    if i > 0 {
                        out.push(' ');
                    }
                } else {
                    out.push('\n');
                    out.push_str(&pad(indent + 1));
                }
                write_value(out, x, indent + 1);
            }
            if !flat {
                out.push('\n');
                out.push_str(&pad(indent));
            }
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            if map.len() == 2 && map.contains_key("re") && map.contains_key("im") {
                write!(out, "{{\"re\": ").unwrap();
                write_value(out, &map["re"], indent);
                out.push_str(", \"im\": ");
                write_value(out, &map["im"], indent);
                out.push('}');
                return;
            }
            out.push('{');
            for (i, (k, x)) in map.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push('\n');
                out.push_str(&pad(indent + 1));
                write!(out, "{}: ", Value::String(k.clone())).unwrap();
                write_value(out, x, indent + 1);
            }
            out.push('\n');
            out.push_str(&pad(indent));
            out.push('}');
        }
    }
}

pub fn render_json(v: &Value) -> String {
    let mut s = String::new();
    write_value(&mut s, v, 0);
    s.push('\n');
    s
}

/// A CSV table. Rows set to None are written as gap markers: the time
/// followed by empty cells.
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<(f64, Option<Vec<f64>>)>,
}

impl Table {
    pub fn render(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        let width = self.header.len().saturating_sub(1);
        for (t, row) in &self.rows {
            s.push_str(&fmt_float(*t));
            match row {
                Some(r) => {
                    for x in r {
                        s.push(',');
                        s.push_str(&fmt_float(*x).replace("null", "nan"));
                    }
                }
                None => s.push_str(&",".repeat(width)),
            }
            s.push('\n');
        }
        s
    }
}

/// Write to `path` via a temporary file in the same directory, or to
/// standard output when no path is given.
pub fn emit(text: &str, path: Option<&Path>) -> std::io::Result<()> {
    match path {
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()
        }
        Some(p) => {
            let dir = match p.parent() {
                Some(d) if !d.as_os_str().is_empty() => d,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
            tmp.write_all(text.as_bytes())?;
            tmp.flush()?;
            tmp.persist(p).map_err(|e| e.error)?;
            log::info!("wrote {}", p.display());
            Ok(())
        }
    }
}
