//! Plain-text run configuration: `key = value` lines, `#` comments, and
//! command-line overrides, resolved against a closed per-command key list.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{CliError, Result};

/// Keys accepted by a command, with their defaults (`None` = required).
pub type KeySpec = &'static [(&'static str, Option<&'static str>)];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    command: &'static str,
    values: BTreeMap<String, String>,
}

/// Splits a config text into `(line, key, value)` triples.
pub fn parse_pairs(text: &str) -> Result<Vec<(usize, String, String)>> {
    let mut out = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| CliError::Config {
            line: k + 1,
            msg: format!("expected `key = value`, found {line:?}"),
        })?;
        let key = key.trim();
        if key.is_empty() || key.contains(char::is_whitespace) {
            return Err(CliError::Config {
                line: k + 1,
                msg: format!("bad key {key:?}"),
            });
        }
        out.push((k + 1, key.to_string(), value.trim().to_string()));
    }
    Ok(out)
}

impl RunConfig {
    /// Merges file entries and overrides (later wins) over the defaults.
    pub fn resolve(
        command: &'static str,
        keys: KeySpec,
        file: Option<&str>,
        overrides: &[String],
    ) -> Result<Self> {
        let known = |key: &str| keys.iter().any(|(k, _)| *k == key);
        let mut values: BTreeMap<String, String> = keys
            .iter()
            .filter_map(|(k, d)| d.map(|d| (k.to_string(), d.to_string())))
            .collect();
        if let Some(text) = file {
            let mut seen = BTreeMap::new();
            for (line, key, value) in parse_pairs(text)? {
                if !known(&key) {
                    return Err(CliError::UnknownKey { key, command });
                }
                if let Some(first) = seen.insert(key.clone(), line) {
                    return Err(CliError::Config {
                        line,
                        msg: format!("key {key:?} repeats line {first}"),
                    });
                }
                values.insert(key, value);
            }
        }
        for o in overrides {
            let (key, value) = o.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("override {o:?} is not of the form key=value"))
            })?;
            let key = key.trim();
            if !known(key) {
                return Err(CliError::UnknownKey {
                    key: key.to_string(),
                    command,
                });
            }
            values.insert(key.to_string(), value.trim().to_string());
        }
        for (k, _) in keys {
            if !values.contains_key(*k) {
                return Err(CliError::Missing {
                    key: k.to_string(),
                    command,
                });
            }
        }
        Ok(Self { command, values })
    }

    pub fn command(&self) -> &'static str {
        self.command
    }

    pub fn str(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).unwrap_or("")
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        let v = self.str(key);
        v.parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| CliError::Value {
                key: key.to_string(),
                msg: format!("expected a finite number, got {v:?}"),
            })
    }

    /// A number in the open interval `(lo, hi)`.
    pub fn f64_open(&self, key: &str, lo: f64, hi: f64) -> Result<f64> {
        let x = self.f64(key)?;
        if x > lo && x < hi {
            Ok(x)
        } else {
            Err(CliError::Value {
                key: key.to_string(),
                msg: format!("{x} is outside ({lo}, {hi})"),
            })
        }
    }

    pub fn usize(&self, key: &str) -> Result<usize> {
        let v = self.str(key);
        v.parse().map_err(|_| CliError::Value {
            key: key.to_string(),
            msg: format!("expected a non-negative integer, got {v:?}"),
        })
    }

    pub fn u64(&self, key: &str) -> Result<u64> {
        let v = self.str(key);
        v.parse().map_err(|_| CliError::Value {
            key: key.to_string(),
            msg: format!("expected a non-negative integer, got {v:?}"),
        })
    }

    /// `None` for the literal `auto`.
    pub fn auto_f64(&self, key: &str) -> Result<Option<f64>> {
        if self.str(key) == "auto" {
            Ok(None)
        } else {
            self.f64(key).map(Some)
        }
    }

    /// The `output` directory, if any.
    pub fn output(&self) -> Option<PathBuf> {
        match self.str("output") {
            "" | "-" => None,
            p => Some(PathBuf::from(p)),
        }
    }

    /// The fully resolved configuration in the input format.
    pub fn to_text(&self) -> String {
        let mut out = format!("# resolved configuration for `{}`\n", self.command);
        for (k, v) in &self.values {
            out.push_str(&format!("{k} = {v}\n"));
        }
        out
    }

    /// Writes [`Self::to_text`] to `dir/config.resolved`.
    pub fn echo_into(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("config.resolved"), self.to_text())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const KEYS: KeySpec = &[("s1", Some("0.5")), ("sigma", None), ("output", Some(""))];

    #[test]
    fn comments_blank_lines_and_overrides() {
        let text = "# header\n\ns1 = 0.3   # inline\nsigma=-0.2\n";
        let c = RunConfig::resolve("x", KEYS, Some(text), &["sigma = 0.4".into()]).unwrap();
        assert_eq!(c.f64("s1").unwrap(), 0.3);
        assert_eq!(c.f64("sigma").unwrap(), 0.4);
    }

    #[test]
    fn rejects_unknown_missing_and_repeated_keys() {
        assert!(matches!(
            RunConfig::resolve("x", KEYS, Some("sigma = 0\nlambda = 2\n"), &[]),
            Err(CliError::UnknownKey { .. })
        ));
        assert!(matches!(
            RunConfig::resolve("x", KEYS, None, &[]),
            Err(CliError::Missing { .. })
        ));
        assert!(matches!(
            RunConfig::resolve("x", KEYS, Some("sigma = 0\nsigma = 1\n"), &[]),
            Err(CliError::Config { line: 2, .. })
        ));
        assert!(matches!(
            RunConfig::resolve("x", KEYS, Some("sigma 0\n"), &[]),
            Err(CliError::Config { line: 1, .. })
        ));
        assert!(matches!(
            RunConfig::resolve("x", KEYS, None, &["nope=1".into()]),
            Err(CliError::UnknownKey { .. })
        ));
    }

    #[test]
    fn ranges_are_checked() {
        let c = RunConfig::resolve("x", KEYS, None, &["sigma=nan".into(), "s1=1".into()]).unwrap();
        assert!(c.f64("sigma").is_err());
        assert!(c.f64_open("s1", 0.0, 1.0).is_err());
    }

    #[test]
    fn resolved_text_parses_back() {
        let c = RunConfig::resolve("x", KEYS, Some("sigma = 0.25\n"), &[]).unwrap();
        let again = RunConfig::resolve("x", KEYS, Some(&c.to_text()), &[]).unwrap();
        assert_eq!(c, again);
    }
}
