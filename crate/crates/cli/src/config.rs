//! Flat key=value configuration files. A manifest written by a previous run
//! parses as a config, which is how manifest round-trips work: flags beat
//! config values, config values beat defaults.

use crate::CliError;
use std::collections::HashMap;
use std::path::Path;
use std::str::FromStr;

#[derive(Debug, Default)]
pub struct Config {
    entries: HashMap<String, String>,
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Config, CliError> {
        let Some(path) = path else {
            return Ok(Config::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let mut entries = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Io(format!(
                    "{}:{}: expected key=value, got {:?}",
                    path.display(),
                    idx + 1,
                    line
                )));
            };
            entries.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Config { entries })
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        match self.entries.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|e| {
                CliError::Usage(format!("config key {key}={raw:?} does not parse: {e}"))
            }),
        }
    }

    /// Comma-separated float list.
    pub fn get_list(&self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        match self.entries.get(key) {
            None => Ok(None),
            Some(raw) => parse_float_list(raw)
                .map(Some)
                .map_err(|e| CliError::Usage(format!("config key {key}: {e}"))),
        }
    }
}

pub fn parse_float_list(raw: &str) -> Result<Vec<f64>, String> {
    let mut out = Vec::new();
    for part in raw.split(',') {
        let part = part.trim();
        if part.is_empty() {
            return Err(format!("empty entry in list {raw:?}"));
        }
        let v: f64 = part
            .parse()
            .map_err(|e| format!("bad float {part:?}: {e}"))?;
        if !v.is_finite() {
            return Err(format!("non-finite value {part:?}"));
        }
        out.push(v);
    }
    if out.is_empty() {
        return Err("empty list".to_string());
    }
    Ok(out)
}

/// flag value, else config value, else default.
pub fn resolve<T: Copy>(flag: Option<T>, config: Option<T>, default: T) -> T {
    flag.or(config).unwrap_or(default)
}
