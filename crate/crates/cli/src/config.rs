//! Flat key = value experiment configuration.
//!
//! One option per line, `key = value`, `#` comments. Values stay typed
//! at the point of use: getters parse and validate, so a bad probability
//! names the offending key. Saving writes keys sorted, so
//! save(load(x)) == x for any canonical file.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentConfig {
    entries: BTreeMap<String, String>,
}

impl ExperimentConfig {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("config line {lineno}: expected `key = value`, got {line:?}"))?;
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() {
                bail!("config line {lineno}: empty key");
            }
            if !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
                bail!("config line {lineno}: invalid key {key:?}");
            }
            if entries.insert(key.to_string(), value.to_string()).is_some() {
                bail!("config line {lineno}: duplicate key {key:?}");
            }
        }
        Ok(ExperimentConfig { entries })
    }

    pub fn save_string(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.entries.insert(key.to_string(), value.to_string());
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    fn parse_key<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.entries.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<T>()
                .map(Some)
                .map_err(|e| anyhow!("config key {key:?}: cannot parse {v:?}: {e}")),
        }
    }

    pub fn usize_of(&self, key: &str) -> Result<Option<usize>> {
        let v: Option<usize> = self.parse_key(key)?;
        if let Some(x) = v {
            if x == 0 && matches!(key, "n" | "trials" | "runs" | "samples" | "steps") {
                bail!("config key {key:?}: must be positive");
            }
        }
        Ok(v)
    }

    pub fn u64_of(&self, key: &str) -> Result<Option<u64>> {
        self.parse_key(key)
    }

    pub fn f64_of(&self, key: &str) -> Result<Option<f64>> {
        self.parse_key(key)
    }

    pub fn probability_of(&self, key: &str) -> Result<Option<f64>> {
        match self.f64_of(key)? {
            None => Ok(None),
            Some(p) if (0.0..=1.0).contains(&p) => Ok(Some(p)),
            Some(p) => bail!("config key {key:?}: probability {p} outside [0, 1]"),
        }
    }

    pub fn string_of(&self, key: &str) -> Option<String> {
        self.entries.get(key).cloned()
    }
}
