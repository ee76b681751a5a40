//! Flat `key = value` config files, overridden by command-line flags.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{input, CliError, Result};

pub const KNOWN_KEYS: &[&str] = &[
    "style",
    "origin_budget",
    "sentence_cap",
    "entity_prompt",
    "gazetteer",
    "annotations",
    "policy",
    "negatives",
    "regime",
    "split",
    "seed",
    "jobs",
    "endpoint",
    "timeout_ms",
    "entity_scope",
    "w_sent",
    "w_ent",
    "w_cap",
    "weights",
    "train_index",
    "meteor",
];

#[derive(Debug, Default)]
pub struct Settings {
    file: BTreeMap<String, String>,
    flags: BTreeMap<String, String>,
    resolved: BTreeMap<String, String>,
}

fn normalize_key(key: &str) -> String {
    key.trim().replace('-', "_")
}

pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Schema(format!("config line {}: expected key = value", i + 1)))?;
        let key = normalize_key(key);
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(CliError::Schema(format!("config line {}: unknown key {key:?}", i + 1)));
        }
        out.insert(key, value.trim().to_string());
    }
    Ok(out)
}

impl Settings {
    pub fn load(config: Option<&Path>) -> Result<Self> {
        let file = match config {
            Some(path) => parse_config(&fs::read_to_string(input(path)?)?)?,
            None => BTreeMap::new(),
        };
        Ok(Settings { file, ..Default::default() })
    }

    /// Records a flag value; flags win over the config file.
    pub fn flag(&mut self, key: &str, value: Option<impl ToString>) -> &mut Self {
        if let Some(v) = value {
            self.flags.insert(key.to_string(), v.to_string());
        }
        self
    }

    pub fn has(&self, key: &str) -> bool {
        self.raw(key).is_some()
    }

    fn raw(&self, key: &str) -> Option<&String> {
        self.flags.get(key).or_else(|| self.file.get(key))
    }

    fn parse<T>(key: &str, raw: &str) -> Result<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        raw.parse().map_err(|e| CliError::Usage(format!("invalid value {raw:?} for {key}: {e}")))
    }

    pub fn get<T>(&mut self, key: &str, default: T) -> Result<T>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let value = match self.raw(key) {
            Some(raw) => Self::parse(key, raw)?,
            None => default,
        };
        self.resolved.insert(key.to_string(), value.to_string());
        Ok(value)
    }

    pub fn get_opt<T>(&mut self, key: &str) -> Result<Option<T>>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        let Some(raw) = self.raw(key).cloned() else {
            return Ok(None);
        };
        let value: T = Self::parse(key, &raw)?;
        self.resolved.insert(key.to_string(), value.to_string());
        Ok(Some(value))
    }

    pub fn require<T>(&mut self, key: &str) -> Result<T>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        self.get_opt(key)?.ok_or_else(|| CliError::Usage(format!("--{} is required", key.replace('_', "-"))))
    }

    /// Records a value that did not come from a key, such as an input path.
    pub fn note(&mut self, key: &str, value: impl Display) {
        self.resolved.insert(key.to_string(), value.to_string());
    }

    pub fn resolved(&self) -> &BTreeMap<String, String> {
        &self.resolved
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let mut s = Settings { file: parse_config("# run\nstyle = nytimes\norigin-budget=300\n").unwrap(), ..Default::default() };
        s.flag("origin_budget", Some(400));
        assert_eq!(s.get::<String>("style", "goodnews".into()).unwrap(), "nytimes");
        assert_eq!(s.get::<usize>("origin_budget", 500).unwrap(), 400);
        assert_eq!(s.get::<usize>("sentence_cap", 600).unwrap(), 600);
        assert_eq!(s.resolved()["sentence_cap"], "600");
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        assert!(matches!(parse_config("colour = red"), Err(CliError::Schema(_))));
        assert!(matches!(parse_config("style"), Err(CliError::Schema(_))));
        let mut s = Settings::default();
        s.flag("jobs", Some("many"));
        assert!(matches!(s.get::<usize>("jobs", 1), Err(CliError::Usage(_))));
    }
}
