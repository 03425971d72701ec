//! Summary/CSV artifact writing and golden-file pin/verify.
//!
//! `summary.json` keys are emitted in sorted order and floats use the
//! shortest round-trip form, so reruns with the same config are
//! byte-identical once the `generated_at` field is excluded.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use serde_json::{json, Map, Value};

pub const SCHEMA_VERSION: u32 = 1;

pub struct Reporter {
    out_dir: PathBuf,
}

impl Reporter {
    pub fn new(out_dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(out_dir)
            .with_context(|| format!("creating output directory {}", out_dir.display()))?;
        Ok(Self { out_dir: out_dir.to_path_buf() })
    }

    /// Assemble the versioned summary envelope.
    pub fn envelope(command: &str, config_echo: Value, results: Value) -> Value {
        json!({
            "schema_version": SCHEMA_VERSION,
            "command": command,
            "config": config_echo,
            "results": results,
            "generated_at": SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        })
    }

    pub fn write_summary(&self, summary: &Value) -> Result<PathBuf> {
        let path = self.out_dir.join("summary.json");
        std::fs::write(&path, format!("{}\n", serde_json::to_string_pretty(summary)?))
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }

    pub fn write_csv(&self, name: &str, content: &str) -> Result<PathBuf> {
        let path = self.out_dir.join(name);
        std::fs::write(&path, content).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

fn strip_volatile(v: &Value) -> Value {
    match v {
        Value::Object(map) => {
            let mut out = Map::new();
            for (k, val) in map {
                if k == "generated_at" {
                    continue;
                }
                out.insert(k.clone(), strip_volatile(val));
            }
            Value::Object(out)
        }
        other => other.clone(),
    }
}

/// Write a golden file holding the summary and the comparison tolerance.
pub fn pin(path: &Path, summary: &Value, abs_tol: f64) -> Result<()> {
    let golden = json!({
        "abs_tol": abs_tol,
        "summary": strip_volatile(summary),
    });
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, format!("{}\n", serde_json::to_string_pretty(&golden)?))
        .with_context(|| format!("writing golden {}", path.display()))?;
    Ok(())
}

/// Compare a freshly computed summary against a pinned golden file.
/// Numeric leaves must agree within the stored absolute tolerance; all
/// other leaves must match exactly.
pub fn verify(path: &Path, summary: &Value) -> Result<()> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading golden {}", path.display()))?;
    let golden: Value = serde_json::from_str(&text)?;
    let abs_tol = golden
        .get("abs_tol")
        .and_then(Value::as_f64)
        .unwrap_or(0.0);
    let want = golden
        .get("summary")
        .ok_or_else(|| anyhow::anyhow!("golden file has no summary"))?;
    let got = strip_volatile(summary);
    let mut mismatches = Vec::new();
    compare("$", want, &got, abs_tol, &mut mismatches);
    if mismatches.is_empty() {
        Ok(())
    } else {
        bail!("golden mismatch against {}:\n{}", path.display(), mismatches.join("\n"))
    }
}

fn compare(path: &str, want: &Value, got: &Value, tol: f64, out: &mut Vec<String>) {
    match (want, got) {
        (Value::Object(a), Value::Object(b)) => {
            for (k, wv) in a {
                match b.get(k) {
                    Some(gv) => compare(&format!("{path}.{k}"), wv, gv, tol, out),
                    None => out.push(format!("{path}.{k}: missing")),
                }
            }
            for k in b.keys() {
                if !a.contains_key(k) {
                    out.push(format!("{path}.{k}: unexpected"));
                }
            }
        }
        (Value::Array(a), Value::Array(b)) => {
            if a.len() != b.len() {
                out.push(format!("{path}: length {} vs {}", a.len(), b.len()));
                return;
            }
            for (i, (wv, gv)) in a.iter().zip(b).enumerate() {
                compare(&format!("{path}[{i}]"), wv, gv, tol, out);
            }
        }
        (Value::Number(a), Value::Number(b)) => {
            let (x, y) = (a.as_f64().unwrap_or(f64::NAN), b.as_f64().unwrap_or(f64::NAN));
            if !((x - y).abs() <= tol || x == y) {
                out.push(format!("{path}: {x} vs {y} (tol {tol})"));
            }
        }
        _ => {
            if want != got {
                out.push(format!("{path}: {want} vs {got}"));
            }
        }
    }
}
