//! Flat `key = value` configuration files merged with command-line flags.
//!
//! ```text
//! # Kepler, moderate eccentricity
//! problem = kepler
//! e = 0.5
//! method = cgp2
//! h = 2pi/1600
//! periods = 100
//! ```
//!
//! Keys are the long flag names without the leading dashes. Blank lines and
//! `#` comments are ignored. A flag given on the command line overrides the
//! same key from the file.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{CliError, CliResult};

/// Resolved settings of one invocation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

/// Parses config text into ordered `(key, value)` pairs.
pub fn parse_config(text: &str) -> CliResult<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (index, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::usage(format!("config line {}: expected `key = value`", index + 1))
        })?;
        let key = key.trim();
        if key.is_empty() {
            return Err(CliError::usage(format!(
                "config line {}: empty key",
                index + 1
            )));
        }
        pairs.push((key.to_string(), value.trim().to_string()));
    }
    Ok(pairs)
}

impl Settings {
    /// Merges an optional config file with flag values; flags win. Keys
    /// outside `allowed` are rejected so typos do not pass silently.
    pub fn resolve(
        config: Option<&Path>,
        flags: &[(&'static str, Option<String>)],
        allowed: &[&str],
    ) -> CliResult<Self> {
        let mut values = BTreeMap::new();
        if let Some(path) = config {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::usage(format!("cannot read config {}: {e}", path.display()))
            })?;
            for (key, value) in parse_config(&text)? {
                if !allowed.contains(&key.as_str()) {
                    return Err(CliError::usage(format!(
                        "unknown config key `{key}` in {}",
                        path.display()
                    )));
                }
                values.insert(key, value);
            }
        }
        for (key, value) in flags {
            if let Some(value) = value {
                values.insert(key.to_string(), value.clone());
            }
        }
        Ok(Self { values })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn require(&self, key: &str) -> CliResult<&str> {
        self.get(key)
            .ok_or_else(|| CliError::usage(format!("missing required setting `{key}`")))
    }

    pub fn parse<T: std::str::FromStr>(&self, key: &str) -> CliResult<Option<T>> {
        self.get(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| CliError::usage(format!("invalid value `{v}` for `{key}`")))
            })
            .transpose()
    }
}
