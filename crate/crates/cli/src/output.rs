use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub parameters: BTreeMap<String, String>,
    pub duration_seconds: f64,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            parameters: BTreeMap::new(),
            duration_seconds: 0.0,
        }
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.parameters.insert(key.to_string(), value.to_string());
    }

    fn comment_lines(&self) -> String {
        let mut s = format!("# command={}\n# version={}\n", self.command, self.version);
        for (k, v) in &self.parameters {
            s.push_str(&format!("# {k}={v}\n"));
        }
        s.push_str(&format!("# duration_seconds={:.3}\n", self.duration_seconds));
        s
    }
}

/// Seventeen significant digits.
pub fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        v.to_string()
    }
}

pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self { header, rows: Vec::new() }
    }

    pub fn to_csv(&self, manifest: &RunManifest) -> String {
        let mut s = manifest.comment_lines();
        s.push_str(&self.header.join(","));
        s.push('\n');
        for row in &self.rows {
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }

    pub fn to_json(&self, manifest: &RunManifest) -> serde_json::Value {
        let rows: Vec<BTreeMap<&str, &str>> = self
            .rows
            .iter()
            .map(|r| self.header.iter().copied().zip(r.iter().map(String::as_str)).collect())
            .collect();
        serde_json::json!({ "manifest": manifest, "rows": rows })
    }
}

/// Write to `path`, or stdout when absent.
pub fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().unwrap_or_default().to_os_string();
    name.push(".configs.json");
    out.with_file_name(name)
}
