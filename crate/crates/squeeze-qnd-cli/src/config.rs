//! Flat `key = value` run configuration.
//!
//! The on-disk format is one assignment per line, `#` starting a comment,
//! blank lines ignored. Keys are snake_case identifiers and match the
//! emitted field names exactly. Command-line `--set key=value` overrides
//! replace file entries. Every violation is reported with the offending
//! line number; overrides report as line 0.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Line-precise configuration error. `line == 0` marks a command-line
/// override as the origin.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl ConfigError {
    fn new(line: usize, message: impl Into<String>) -> Self {
        Self {
            line,
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "command-line override: {}", self.message)
        } else {
            write!(f, "config line {}: {}", self.line, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Entry {
    value: String,
    line: usize,
}

/// Parsed key/value assignments with their source lines.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunConfig {
    entries: BTreeMap<String, Entry>,
}

fn valid_key(key: &str) -> bool {
    !key.is_empty()
        && key.chars().next().is_some_and(|c| c.is_ascii_lowercase())
        && key
            .chars()
            .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

impl RunConfig {
    /// Parse the `key = value` text format.
    pub fn parse_str(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let uncommented = raw.split('#').next().unwrap_or("");
            let body = uncommented.trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = split_assignment(body, line)?;
            if let Some(prev) = cfg.entries.get(&key) {
                return Err(ConfigError::new(
                    line,
                    format!("duplicate key `{key}` (first set on line {})", prev.line),
                ));
            }
            cfg.entries.insert(key, Entry { value, line });
        }
        Ok(cfg)
    }

    /// Apply one `key=value` command-line override, replacing any file
    /// entry of the same key.
    pub fn apply_override(&mut self, spec: &str) -> Result<(), ConfigError> {
        let (key, value) = split_assignment(spec.trim(), 0)?;
        self.entries.insert(key, Entry { value, line: 0 });
        Ok(())
    }

    /// Start typed resolution; every key must be consumed before
    /// [`Resolver::finish`].
    pub fn resolver(&self) -> Resolver<'_> {
        Resolver {
            cfg: self,
            used: BTreeSet::new(),
        }
    }
}

fn split_assignment(body: &str, line: usize) -> Result<(String, String), ConfigError> {
    let Some((key, value)) = body.split_once('=') else {
        return Err(ConfigError::new(
            line,
            format!("expected `key = value`, got `{body}`"),
        ));
    };
    let key = key.trim();
    let value = value.trim();
    if !valid_key(key) {
        return Err(ConfigError::new(
            line,
            format!("invalid key `{key}` (snake_case identifiers only)"),
        ));
    }
    if value.is_empty() {
        return Err(ConfigError::new(line, format!("empty value for key `{key}`")));
    }
    Ok((key.to_string(), value.to_string()))
}

/// Typed accessor over a [`RunConfig`] that tracks which keys a command
/// consumed, so leftovers surface as line-precise unknown-key errors.
pub struct Resolver<'a> {
    cfg: &'a RunConfig,
    used: BTreeSet<String>,
}

impl Resolver<'_> {
    fn raw(&mut self, key: &str) -> Option<(&str, usize)> {
        self.used.insert(key.to_string());
        self.cfg
            .entries
            .get(key)
            .map(|e| (e.value.as_str(), e.line))
    }

    pub fn f64_or(&mut self, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.raw(key) {
            None => Ok(default),
            Some((v, line)) => match v.parse::<f64>() {
                Ok(x) if x.is_finite() => Ok(x),
                _ => Err(ConfigError::new(
                    line,
                    format!("key `{key}`: expected a finite number, got `{v}`"),
                )),
            },
        }
    }

    pub fn u64_or(&mut self, key: &str, default: u64) -> Result<u64, ConfigError> {
        match self.raw(key) {
            None => Ok(default),
            Some((v, line)) => v.parse::<u64>().map_err(|_| {
                ConfigError::new(
                    line,
                    format!("key `{key}`: expected a nonnegative integer, got `{v}`"),
                )
            }),
        }
    }

    pub fn usize_opt(&mut self, key: &str) -> Result<Option<usize>, ConfigError> {
        match self.raw(key) {
            None => Ok(None),
            Some((v, line)) => v.parse::<usize>().map(Some).map_err(|_| {
                ConfigError::new(
                    line,
                    format!("key `{key}`: expected a nonnegative integer, got `{v}`"),
                )
            }),
        }
    }

    pub fn bool_or(&mut self, key: &str, default: bool) -> Result<bool, ConfigError> {
        match self.raw(key) {
            None => Ok(default),
            Some(("true", _)) => Ok(true),
            Some(("false", _)) => Ok(false),
            Some((v, line)) => Err(ConfigError::new(
                line,
                format!("key `{key}`: expected true or false, got `{v}`"),
            )),
        }
    }

    pub fn str_or(&mut self, key: &str, default: &str) -> String {
        match self.raw(key) {
            None => default.to_string(),
            Some((v, _)) => v.to_string(),
        }
    }

    /// Error on the first key the command did not consume.
    pub fn finish(self, command: &str) -> Result<(), ConfigError> {
        for (key, entry) in &self.cfg.entries {
            if !self.used.contains(key) {
                return Err(ConfigError::new(
                    entry.line,
                    format!("unknown key `{key}` for command {command}"),
                ));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_whitespace() {
        let text = "# full-line comment\n\n  r = 0.9  # trailing comment\nseed=42\n";
        let cfg = RunConfig::parse_str(text).unwrap();
        let mut res = cfg.resolver();
        assert_eq!(res.f64_or("r", 0.0).unwrap(), 0.9);
        assert_eq!(res.u64_or("seed", 0).unwrap(), 42);
        res.finish("test").unwrap();
    }

    #[test]
    fn missing_equals_is_line_precise() {
        let err = RunConfig::parse_str("r = 0.9\nbogus line\n").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(err.to_string().contains("config line 2"));
    }

    #[test]
    fn duplicate_keys_rejected() {
        let err = RunConfig::parse_str("r = 0.9\nr = 1.0\n").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(err.message.contains("duplicate"));
    }

    #[test]
    fn invalid_keys_rejected() {
        assert!(RunConfig::parse_str("R = 1\n").is_err());
        assert!(RunConfig::parse_str("9r = 1\n").is_err());
        assert!(RunConfig::parse_str(" = 1\n").is_err());
        assert!(RunConfig::parse_str("r.x = 1\n").is_err());
    }

    #[test]
    fn empty_value_rejected() {
        let err = RunConfig::parse_str("r =   # nothing\n").unwrap_err();
        assert!(err.message.contains("empty value"));
    }

    #[test]
    fn overrides_replace_file_entries() {
        let mut cfg = RunConfig::parse_str("r = 0.9\n").unwrap();
        cfg.apply_override("r=1.2").unwrap();
        cfg.apply_override("trials = 500").unwrap();
        let mut res = cfg.resolver();
        assert_eq!(res.f64_or("r", 0.0).unwrap(), 1.2);
        assert_eq!(res.u64_or("trials", 0).unwrap(), 500);
        res.finish("test").unwrap();

        let err = cfg.apply_override("not an assignment").unwrap_err();
        assert_eq!(err.line, 0);
        assert!(err.to_string().starts_with("command-line override"));
    }

    #[test]
    fn unknown_keys_surface_with_lines() {
        let cfg = RunConfig::parse_str("r = 0.9\nmystery = 1\n").unwrap();
        let mut res = cfg.resolver();
        res.f64_or("r", 0.0).unwrap();
        let err = res.finish("concentrate").unwrap_err();
        assert_eq!(err.line, 2);
        assert!(err.message.contains("mystery"));
    }

    #[test]
    fn bad_number_reports_key_and_line() {
        let cfg = RunConfig::parse_str("r = fast\n").unwrap();
        let err = cfg.resolver().f64_or("r", 0.0).unwrap_err();
        assert_eq!(err.line, 1);
        assert!(err.message.contains("`fast`"));
        let cfg = RunConfig::parse_str("r = inf\n").unwrap();
        assert!(cfg.resolver().f64_or("r", 0.0).is_err());
    }

    #[test]
    fn bool_values() {
        let cfg = RunConfig::parse_str("noise_enabled = false\n").unwrap();
        assert!(!cfg.resolver().bool_or("noise_enabled", true).unwrap());
        let cfg = RunConfig::parse_str("noise_enabled = 1\n").unwrap();
        assert!(cfg.resolver().bool_or("noise_enabled", true).is_err());
    }
}
