//! Artifact writing. JSON reports carry `"schema": 1`; CSV files have a
//! header row. Nothing time- or host-dependent is written, so identical
//! inputs give identical bytes.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::CliError;

pub const SCHEMA: u32 = 1;

/// One checked quantity against its tolerance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `max_residual <= tolerance`; NaN fails.
    pub fn at_most(name: impl Into<String>, max_residual: f64, tolerance: f64) -> Self {
        Self { name: name.into(), max_residual, tolerance, pass: max_residual <= tolerance }
    }

    /// Passes when `value >= minimum`; stored as the shortfall `minimum - value`.
    pub fn at_least(name: impl Into<String>, value: f64, minimum: f64) -> Self {
        Self { name: name.into(), max_residual: (minimum - value).max(0.0), tolerance: 0.0, pass: value >= minimum }
    }
}

pub fn all_pass(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.pass)
}

pub struct OutDir(PathBuf);

impl OutDir {
    pub fn create(path: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(path).map_err(CliError::io(format!("cannot create {}", path.display())))?;
        Ok(Self(path.to_path_buf()))
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }

    /// Writes `{"schema": 1, "command": command, ...body}`.
    pub fn write_report(&self, name: &str, command: &str, body: Value) -> Result<PathBuf, CliError> {
        let mut report = json!({ "schema": SCHEMA, "command": command });
        if let (Value::Object(dst), Value::Object(src)) = (&mut report, body) {
            dst.extend(src);
        }
        self.write_json(name, &report)
    }

    pub fn write_json<T: Serialize + ?Sized>(&self, name: &str, value: &T) -> Result<PathBuf, CliError> {
        let path = self.path(name);
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Failed(e.to_string()))?;
        text.push('\n');
        fs::write(&path, text).map_err(CliError::io(format!("cannot write {}", path.display())))?;
        Ok(path)
    }

    pub fn write_csv<S: AsRef<str>>(&self, name: &str, header: &[S], rows: &[Vec<String>]) -> Result<PathBuf, CliError> {
        let path = self.path(name);
        let to_err = |e: csv::Error| CliError::Failed(format!("cannot write {}: {e}", path.display()));
        let mut w = csv::Writer::from_path(&path).map_err(to_err)?;
        w.write_record(header.iter().map(|h| h.as_ref())).map_err(to_err)?;
        for row in rows {
            w.write_record(row).map_err(to_err)?;
        }
        w.flush().map_err(CliError::io(format!("cannot write {}", path.display())))?;
        Ok(path)
    }
}

/// Shortest round-trip representation of each value.
pub fn format_row(values: &[f64]) -> Vec<String> {
    values.iter().map(|v| format!("{v:?}")).collect()
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("bad input {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nan_residual_fails() {
        assert!(!Check::at_most("x", f64::NAN, 1.0).pass);
        assert!(Check::at_most("x", 1.0, 1.0).pass);
        let c = Check::at_least("f", 0.99, 0.999);
        assert!(!c.pass && (c.max_residual - 0.009).abs() < 1e-15);
    }

    #[test]
    fn rows_round_trip() {
        let v = [0.1 + 0.2, 1e-300, -0.0, 2.0];
        let parsed: Vec<f64> = format_row(&v).iter().map(|s| s.parse().unwrap()).collect();
        assert_eq!(parsed.iter().map(|x| x.to_bits()).collect::<Vec<_>>(), v.iter().map(|x| x.to_bits()).collect::<Vec<_>>());
    }
}
