//! KEY=VALUE run configuration mirroring the command-line flags.
//!
//! One `key = value` pair per line, `#` starts a comment, blank lines are
//! skipped. Keys are the long flag names without the leading dashes
//! (`j-min`, `bases`, ...). A value given on the command line wins over
//! the file; keys no command recognizes are reported as errors.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::Path;
use std::str::FromStr;

#[derive(Debug, Default)]
pub struct ConfigMap {
    entries: BTreeMap<String, String>,
}

impl ConfigMap {
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("config line {}: expected key = value, got {raw:?}", idx + 1))?;
            let key = key.trim().to_string();
            if key.is_empty() {
                return Err(format!("config line {}: empty key", idx + 1));
            }
            if entries.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(format!("config line {}: duplicate key {key:?}", idx + 1));
            }
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        Self::parse(&text)
    }

    /// Merge one key with its command-line counterpart. The flag wins;
    /// otherwise the file value is parsed. Removes the key either way so
    /// `finish` can flag leftovers as unknown.
    pub fn take<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>, String>
    where
        T: FromStr,
        T::Err: Display,
    {
        let file_value = self.entries.remove(key);
        if flag.is_some() {
            return Ok(flag);
        }
        match file_value {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|e| format!("config key {key}: {e} (value {raw:?})")),
        }
    }

    /// Error out on keys nothing consumed; catches typos early.
    pub fn finish(self) -> Result<(), String> {
        if self.entries.is_empty() {
            Ok(())
        } else {
            let keys: Vec<String> = self.entries.into_keys().collect();
            Err(format!("unknown config keys: {}", keys.join(", ")))
        }
    }
}

/// Comma-separated list of parseable items. An empty or all-whitespace
/// string is an empty list, so the domain-level validation produces the
/// message instead of the parser.
pub fn parse_list<T>(raw: &str, what: &str) -> Result<Vec<T>, String>
where
    T: FromStr,
    T::Err: Display,
{
    let raw = raw.trim();
    if raw.is_empty() {
        return Ok(Vec::new());
    }
    raw.split(',')
        .map(|item| {
            let item = item.trim();
            if item.is_empty() {
                return Err(format!("empty item in {what} list {raw:?}"));
            }
            item.parse()
                .map_err(|e| format!("bad {what} entry {item:?}: {e}"))
        })
        .collect()
}
