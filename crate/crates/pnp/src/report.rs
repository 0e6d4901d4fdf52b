use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

use crate::config::RunConfig;
use crate::error::{CliError, Result};

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().fold(String::with_capacity(bytes.len() * 2), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// A command's result: a JSON object rendered as text or JSON, plus the
/// files it wrote.
#[derive(Debug, Clone)]
pub struct Report {
    pub command: &'static str,
    pub body: Map<String, Value>,
    pub files: Vec<PathBuf>,
}

impl Report {
    pub fn new(command: &'static str, config: &RunConfig) -> Self {
        let resolved: Map<String, Value> =
            config.entries().into_iter().map(|(k, v)| (k.to_string(), Value::String(v))).collect();
        let mut body = Map::new();
        body.insert("command".into(), command.into());
        body.insert("config".into(), Value::Object(resolved));
        Report { command, body, files: Vec::new() }
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.body.insert(key.to_string(), value.into());
        self
    }

    pub fn dataset(&mut self, hash: &[u8; 32]) -> &mut Self {
        self.set("dataset_hash", hex(hash))
    }

    pub fn file(&mut self, path: PathBuf) {
        self.files.push(path);
    }

    fn finished(&self) -> Map<String, Value> {
        let mut body = self.body.clone();
        let files = self.files.iter().map(|p| Value::String(p.display().to_string())).collect();
        body.insert("files".into(), Value::Array(files));
        body
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&Value::Object(self.finished())).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        render(&mut out, &Value::Object(self.finished()), 0);
        out
    }

    /// Writes `<out>/<command>.json` and returns its path.
    pub fn write_json(&self, out_dir: &Path) -> Result<PathBuf> {
        fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
        let path = out_dir.join(format!("{}.json", self.command));
        fs::write(&path, self.to_json()).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Array(xs) if xs.iter().all(|x| !x.is_object() && !x.is_array()) => {
            Some(xs.iter().map(|x| scalar(x).unwrap()).collect::<Vec<_>>().join(", "))
        }
        _ => None,
    }
}

fn render(out: &mut String, v: &Value, depth: usize) {
    let pad = "  ".repeat(depth);
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                match scalar(x) {
                    Some(s) => {
                        let _ = writeln!(out, "{pad}{k}: {s}");
                    }
                    None => {
                        let _ = writeln!(out, "{pad}{k}:");
                        render(out, x, depth + 1);
                    }
                }
            }
        }
        Value::Array(xs) => {
            for x in xs {
                match scalar(x) {
                    Some(s) => {
                        let _ = writeln!(out, "{pad}- {s}");
                    }
                    None => {
                        let _ = writeln!(out, "{pad}-");
                        render(out, x, depth + 1);
                    }
                }
            }
        }
        other => {
            let _ = writeln!(out, "{pad}{}", scalar(other).unwrap_or_default());
        }
    }
}
