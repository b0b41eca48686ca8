use std::fs::{self, OpenOptions};
use std::io::{ErrorKind, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::commands::Request;
use crate::error::{CliError, Result};

pub const TOOL_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: Map<String, Value>,
    pub seed: u64,
    pub tool_version: String,
    pub timestamp: String,
    pub results: Value,
}

impl RunManifest {
    pub fn new(request: &Request, results: Value) -> Self {
        let parameters = match request.parameters() {
            Value::Object(m) => m,
            other => Map::from_iter([("value".to_string(), other)]),
        };
        RunManifest {
            command: request.name().to_string(),
            parameters,
            seed: request.seed(),
            tool_version: TOOL_VERSION.to_string(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Micros, true),
            results,
        }
    }

    pub fn request(&self) -> Result<Request> {
        Request::from_parts(&self.command, &Value::Object(self.parameters.clone()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| CliError::Json { path: path.to_path_buf(), source })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
        fs::write(path, self.to_pretty()).map_err(|e| CliError::io(path, e))
    }

    /// Writes into `dir` under a fresh name `<command>-<time>[-n].json`.
    pub fn save_in(&self, dir: &Path) -> Result<PathBuf> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let stamp: String = self.timestamp.chars().filter(|c| c.is_ascii_alphanumeric()).collect();
        for n in 0u32.. {
            let name = match n {
                0 => format!("{}-{stamp}.json", self.command),
                n => format!("{}-{stamp}-{n}.json", self.command),
            };
            let path = dir.join(name);
            match OpenOptions::new().write(true).create_new(true).open(&path) {
                Ok(mut f) => {
                    f.write_all(self.to_pretty().as_bytes()).map_err(|e| CliError::io(&path, e))?;
                    return Ok(path);
                }
                Err(e) if e.kind() == ErrorKind::AlreadyExists => continue,
                Err(e) => return Err(CliError::io(&path, e)),
            }
        }
        unreachable!()
    }

    fn to_pretty(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifests serialize");
        s.push('\n');
        s
    }

    /// Reruns the recorded request and compares against the recorded results.
    pub fn verify(&self) -> Result<Vec<String>> {
        let fresh = self.request()?.run()?;
        Ok(compare_results(&self.results, &fresh))
    }
}

/// Differences between recorded and replayed results.
///
/// Numbers must match bit for bit, except inside a norm estimate computed by
/// quadrature, whose `value` may move by the sum of the two error bounds.
pub fn compare_results(recorded: &Value, replayed: &Value) -> Vec<String> {
    let mut out = Vec::new();
    walk(recorded, replayed, &mut String::new(), &mut out);
    out
}

fn is_quadrature(v: &Map<String, Value>) -> bool {
    v.get("method").and_then(Value::as_str) == Some("quadrature") && v.contains_key("error_bound")
}

fn walk(a: &Value, b: &Value, path: &mut String, out: &mut Vec<String>) {
    match (a, b) {
        (Value::Object(x), Value::Object(y)) if is_quadrature(x) && is_quadrature(y) => {
            let (va, vb) = (x["value"].as_f64(), y["value"].as_f64());
            let tol = x["error_bound"].as_f64().unwrap_or(0.0) + y["error_bound"].as_f64().unwrap_or(0.0);
            match (va, vb) {
                (Some(va), Some(vb)) if (va - vb).abs() <= tol => {}
                _ => out.push(format!("{path}/value: {} vs {} (allowed {tol:e})", x["value"], y["value"])),
            }
            for key in x.keys().chain(y.keys().filter(|k| !x.contains_key(*k))) {
                if !matches!(key.as_str(), "value" | "error_bound" | "grid_size") {
                    descend(x.get(key), y.get(key), key, path, out);
                }
            }
        }
        (Value::Object(x), Value::Object(y)) => {
            for key in x.keys().chain(y.keys().filter(|k| !x.contains_key(*k))) {
                descend(x.get(key), y.get(key), key, path, out);
            }
        }
        (Value::Array(x), Value::Array(y)) if x.len() == y.len() => {
            for (i, (u, v)) in x.iter().zip(y).enumerate() {
                let len = path.len();
                path.push_str(&format!("/{i}"));
                walk(u, v, path, out);
                path.truncate(len);
            }
        }
        (Value::Number(x), Value::Number(y)) => {
            let same = match (x.as_f64(), y.as_f64()) {
                (Some(u), Some(v)) => u.to_bits() == v.to_bits(),
                _ => x == y,
            };
            if !same {
                out.push(format!("{path}: {x} vs {y}"));
            }
        }
        _ if a == b => {}
        _ => out.push(format!("{path}: {} vs {}", short(a), short(b))),
    }
}

fn descend(a: Option<&Value>, b: Option<&Value>, key: &str, path: &mut String, out: &mut Vec<String>) {
    let len = path.len();
    path.push('/');
    path.push_str(key);
    match (a, b) {
        (Some(u), Some(v)) => walk(u, v, path, out),
        (Some(_), None) => out.push(format!("{path}: missing on replay")),
        (None, Some(_)) => out.push(format!("{path}: not recorded")),
        (None, None) => {}
    }
    path.truncate(len);
}

fn short(v: &Value) -> String {
    let s = v.to_string();
    if s.len() > 60 {
        format!("{}...", &s[..57])
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn exact_numbers_compare_by_bits() {
        let a = json!({"x": 1.0, "y": [1, 2]});
        assert!(compare_results(&a, &a.clone()).is_empty());
        let b = json!({"x": 1.0000000000000002, "y": [1, 2]});
        assert_eq!(compare_results(&a, &b).len(), 1);
        let c = json!({"x": 1.0, "y": [1, 2], "z": null});
        assert_eq!(compare_results(&a, &c), vec!["/z: not recorded"]);
    }

    #[test]
    fn quadrature_values_compare_within_bounds() {
        let est = |v: f64, grid: u64| json!({"value": v, "method": "quadrature", "error_bound": 1e-9, "grid_size": grid, "p": 3.0});
        let a = json!({"estimate": est(1.0, 256)});
        assert!(compare_results(&a, &json!({"estimate": est(1.0 + 1.5e-9, 512)})).is_empty());
        assert_eq!(compare_results(&a, &json!({"estimate": est(1.0 + 3e-9, 256)})).len(), 1);
    }
}
