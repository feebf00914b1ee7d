//! Flat `key = value` configuration files.
//!
//! One format shared by every command: section-prefixed keys
//! (`scenario.duration`, `filter.mu`), `#` comments, blank lines ignored.
//! Errors carry the line number so messages can point at the offending key.

use crate::error::{Error, Result};
use std::collections::HashMap;
use std::path::Path;

/// Parsed configuration: ordered entries plus a key index.
#[derive(Debug, Clone, Default)]
pub struct Config {
    entries: Vec<(String, String, usize)>,
    index: HashMap<String, usize>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Config> {
        let mut cfg = Config::default();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = match raw.find('#') {
                Some(p) => &raw[..p],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::config(
                    line_no,
                    format!("expected 'key = value', got '{line}'"),
                ));
            };
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() {
                return Err(Error::config(line_no, "empty key"));
            }
            if cfg.index.contains_key(key) {
                return Err(Error::config(line_no, format!("duplicate key '{key}'")));
            }
            cfg.index.insert(key.to_string(), cfg.entries.len());
            cfg.entries
                .push((key.to_string(), value.to_string(), line_no));
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path)?;
        Config::parse(&text)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.index.get(key).map(|&i| self.entries[i].1.as_str())
    }

    /// Line the key was defined on (for anchoring validation errors).
    pub fn line_of(&self, key: &str) -> usize {
        self.index.get(key).map(|&i| self.entries[i].2).unwrap_or(0)
    }

    /// All entries in file order.
    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v, _)| (k.as_str(), v.as_str()))
    }

    fn parse_value<T: std::str::FromStr>(&self, key: &str, kind: &str) -> Result<Option<T>> {
        match self.index.get(key) {
            None => Ok(None),
            Some(&i) => {
                let (_, value, line) = &self.entries[i];
                value.parse::<T>().map(Some).map_err(|_| {
                    Error::config(*line, format!("key '{key}': '{value}' is not a valid {kind}"))
                })
            }
        }
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>> {
        self.parse_value(key, "number")
    }

    pub fn get_u64(&self, key: &str) -> Result<Option<u64>> {
        self.parse_value(key, "integer")
    }

    pub fn get_usize(&self, key: &str) -> Result<Option<usize>> {
        self.parse_value(key, "integer")
    }

    pub fn get_u32(&self, key: &str) -> Result<Option<u32>> {
        self.parse_value(key, "integer")
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.get_f64(key)?.unwrap_or(default))
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64> {
        Ok(self.get_u64(key)?.unwrap_or(default))
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        Ok(self.get_usize(key)?.unwrap_or(default))
    }

    pub fn u32_or(&self, key: &str, default: u32) -> Result<u32> {
        Ok(self.get_u32(key)?.unwrap_or(default))
    }

    pub fn str_or<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.get(key).unwrap_or(default)
    }

    /// Error helper anchored at the key's definition line.
    pub fn invalid(&self, key: &str, message: impl std::fmt::Display) -> Error {
        Error::config(self.line_of(key), format!("key '{key}': {message}"))
    }
}
