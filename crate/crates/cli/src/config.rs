//! Optional `gir.conf` configuration file and setting resolution.
//!
//! Precedence: command-line flags beat `gir.conf` in the working
//! directory, which beats environment fallbacks (`GIR_WORKERS`), which
//! beat built-in defaults.

use std::collections::HashMap;
use std::path::Path;

use anyhow::{bail, Context, Result};

pub const CONFIG_FILE: &str = "gir.conf";

#[derive(Debug, Default)]
pub struct FileConfig {
    values: HashMap<String, String>,
}

impl FileConfig {
    /// Loads `gir.conf` from the working directory when present. A missing
    /// file is an empty configuration; a malformed one is an error.
    pub fn load() -> Result<Self> {
        let path = Path::new(CONFIG_FILE);
        if !path.is_file() {
            return Ok(Self::default());
        }
        Self::parse(&std::fs::read_to_string(path).context("reading gir.conf")?)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut values = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("gir.conf line {}: expected key=value, got {raw:?}", idx + 1);
            };
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// flag > config > default.
    pub fn resolve_string(&self, flag: Option<String>, key: &str, default: &str) -> String {
        flag.or_else(|| self.get(key).map(str::to_string))
            .unwrap_or_else(|| default.to_string())
    }

    /// flag > config > default, for missing-is-an-error settings.
    pub fn resolve_required(&self, flag: Option<String>, key: &str) -> Option<String> {
        flag.or_else(|| self.get(key).map(str::to_string))
    }

    pub fn resolve_usize(&self, flag: Option<usize>, key: &str, default: usize) -> Result<usize> {
        if let Some(v) = flag {
            return Ok(v);
        }
        if let Some(raw) = self.get(key) {
            return raw
                .parse()
                .with_context(|| format!("gir.conf: {key} must be an integer, got {raw:?}"));
        }
        Ok(default)
    }

    /// Worker count: --workers > gir.conf > GIR_WORKERS > 1.
    pub fn resolve_workers(&self, flag: Option<usize>) -> Result<usize> {
        if let Some(v) = flag {
            return Ok(v);
        }
        if let Some(raw) = self.get("workers") {
            return raw
                .parse()
                .with_context(|| format!("gir.conf: workers must be an integer, got {raw:?}"));
        }
        if let Ok(raw) = std::env::var("GIR_WORKERS") {
            return raw
                .parse()
                .with_context(|| format!("GIR_WORKERS must be an integer, got {raw:?}"));
        }
        Ok(1)
    }
}
