//! Flat key-value config files mirroring the command-line flags.
//!
//! One `key = value` pair per line; `#` starts a comment; blank lines are
//! ignored. Keys use the flag spelling (`kappa-range`, `m-list`). Values
//! read from the file fill in flags the user did not pass; explicit flags
//! always win.

use std::collections::HashMap;
use std::path::Path;

/// Keys a config file may define.
pub const KNOWN_KEYS: [&str; 14] = [
    "q1",
    "m",
    "m-list",
    "kappa",
    "kappa-range",
    "theta",
    "alpha",
    "beta",
    "perturb-theta",
    "trials",
    "seed",
    "format",
    "precision",
    "output",
];

#[derive(Debug, Default)]
pub struct Config {
    values: HashMap<String, String>,
}

impl Config {
    pub fn empty() -> Config {
        Config::default()
    }

    /// Parses a config file, rejecting unknown keys and lines without an
    /// equals sign. A key given twice keeps its last value.
    pub fn load(path: &Path) -> Result<Config, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let mut values = HashMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(format!(
                    "config line {}: expected `key = value`, found {raw:?}",
                    lineno + 1
                ));
            };
            let key = key.trim();
            let value = value.trim();
            if !KNOWN_KEYS.contains(&key) {
                return Err(format!("config line {}: unknown key {key:?}", lineno + 1));
            }
            if value.is_empty() {
                return Err(format!("config line {}: key {key:?} has no value", lineno + 1));
            }
            values.insert(key.to_string(), value.to_string());
        }
        Ok(Config { values })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        debug_assert!(KNOWN_KEYS.contains(&key), "unknown config key {key}");
        self.values.get(key).map(String::as_str)
    }
}
