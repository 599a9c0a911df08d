//! Flat `key = value` configuration merged with command-line flags.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::CliError;

/// Every key a config file may contain. Keys that a subcommand does not use
/// are ignored so one file can drive several subcommands.
pub const KNOWN_KEYS: &[&str] = &[
    "bath", "N", "k", "pe", "nbar", "file", "g", "tau", "p", "omega0", "t_end", "dt", "n_points", "time", "engine",
    "mode", "scheme", "seed", "trajectories", "init", "family", "krule", "slopes", "format", "gamma0", "record_every",
    "matrix", "dir", "output",
];

#[derive(Debug, Clone, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    /// Parses a config file body. Blank lines and lines starting with `#` are skipped.
    pub fn parse_config(text: &str, origin: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::config("config", format!("{origin}:{}: expected key = value", lineno + 1)))?;
            let key = key.trim().replace('-', "_");
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(CliError::config("config", format!("{origin}:{}: unknown key `{key}`", lineno + 1)));
            }
            values.insert(key, value.trim().to_string());
        }
        Ok(Settings { values })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config("config", format!("cannot read {}: {e}", path.display())))?;
        Self::parse_config(&text, &path.display().to_string())
    }

    /// Flags win over config values.
    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.values.insert(key.to_string(), value.into());
    }

    pub fn has(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|e| CliError::config(key, format!("cannot parse `{v}`: {e}"))),
        }
    }

    pub fn get_or<T>(&self, key: &str, default: T) -> Result<T, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn require<T>(&self, key: &str) -> Result<T, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.get(key)?.ok_or_else(|| CliError::config(key, "required but not given"))
    }

    /// A value from a fixed set of choices.
    pub fn choice(&self, key: &str, choices: &[&str], default: Option<&str>) -> Result<String, CliError> {
        let v = match (self.raw(key), default) {
            (Some(v), _) => v,
            (None, Some(d)) => d,
            (None, None) => return Err(CliError::config(key, format!("required; one of {}", choices.join(", ")))),
        };
        if choices.contains(&v) {
            Ok(v.to_string())
        } else {
            Err(CliError::config(key, format!("`{v}` is not one of {}", choices.join(", "))))
        }
    }

    /// Output file, checked to have an existing parent directory.
    pub fn output_path(&self, key: &str) -> Result<Option<PathBuf>, CliError> {
        let Some(raw) = self.raw(key) else { return Ok(None) };
        let path = PathBuf::from(raw);
        if path.is_dir() {
            return Err(CliError::config(key, format!("{raw} is a directory")));
        }
        let parent = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        if !parent.is_dir() {
            return Err(CliError::config(key, format!("directory {} does not exist", parent.display())));
        }
        Ok(Some(path))
    }
}

/// Parses `a:b:c` (start, stop, step), `a:b` (step 1), a comma list, or a single count.
pub fn parse_n_list(spec: &str) -> Result<Vec<usize>, String> {
    let num = |s: &str| s.trim().parse::<usize>().map_err(|e| format!("`{s}`: {e}"));
    let list = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        let (a, b, step) = match parts.as_slice() {
            [a, b] => (num(a)?, num(b)?, 1),
            [a, b, c] => (num(a)?, num(b)?, num(c)?),
            _ => return Err(format!("`{spec}` is not a:b or a:b:c")),
        };
        if step == 0 {
            return Err("step must be positive".into());
        }
        if a > b {
            return Err(format!("empty range {a}:{b}"));
        }
        (a..=b).step_by(step).collect()
    } else {
        spec.split(',').map(num).collect::<Result<Vec<_>, _>>()?
    };
    if list.is_empty() {
        return Err("no cluster sizes".into());
    }
    if list.contains(&0) {
        return Err("cluster sizes must be positive".into());
    }
    Ok(list)
}
