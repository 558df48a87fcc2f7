//! `key = value` configuration files. Command-line flags take precedence.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text)
    }

    /// Blank lines and `#` comments are ignored; keys may use `-` or `_`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("config line {}: expected key=value, got '{raw}'", lineno + 1);
            };
            entries.insert(key.trim().replace('_', "-"), value.trim().to_string());
        }
        Ok(Self { entries })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_pairs_and_comments() {
        let c = ConfigFile::parse("# sweep\nrestarts = 12\nseed=3 # trailing\n\nmax_iterations=9\n").unwrap();
        assert_eq!(c.get("restarts"), Some("12"));
        assert_eq!(c.get("seed"), Some("3"));
        assert_eq!(c.get("max-iterations"), Some("9"));
        assert_eq!(c.get("d"), None);
        assert!(ConfigFile::parse("oops").is_err());
    }
}
