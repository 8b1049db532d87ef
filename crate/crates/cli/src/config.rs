//! JSON config loading with field-level error locations.

use std::fmt;
use std::path::{Path, PathBuf};

use kpplab::reaction::ReactionSpec;
use kpplab::scenarios::GridSpec;
use kpplab::solver::SolverConfig;
use kpplab::SetDescriptor;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

/// Input of `simulate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct SimulateConfig {
    pub descriptor: SetDescriptor,
    #[serde(default)]
    pub reaction: ReactionSpec,
    pub grid: GridSpec,
    pub solver: SolverConfig,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_seed() -> u64 {
    42
}

/// A config that failed to parse, with where it failed.
#[derive(Debug)]
pub struct ConfigError {
    pub file: PathBuf,
    pub line: usize,
    pub column: usize,
    /// Dotted path of the offending field, `.` for the document root.
    pub field: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}: field `{}`: {}", self.file.display(), self.line, self.column, self.field, self.message)
    }
}

impl std::error::Error for ConfigError {}

pub fn parse<T: DeserializeOwned>(file: &Path, text: &str) -> Result<T, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        let inner = e.into_inner();
        ConfigError { file: file.to_path_buf(), line: inner.line(), column: inner.column(), field, message: strip_position(&inner.to_string()) }
    })
}

/// Reads and parses a file; returns the raw bytes too so callers can hash them.
pub fn load<T: DeserializeOwned>(file: &Path) -> anyhow::Result<(T, Vec<u8>)> {
    let bytes = std::fs::read(file).map_err(|e| anyhow::anyhow!("cannot read {}: {e}", file.display()))?;
    let text = std::str::from_utf8(&bytes).map_err(|e| anyhow::anyhow!("{} is not UTF-8: {e}", file.display()))?;
    let value = parse(file, text)?;
    Ok((value, bytes))
}

// serde_json appends " at line L column C", which we already report.
fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reports_field_path_and_line() {
        let text = "{\n  \"descriptor\": {\"kind\": \"ball\", \"dim\": 2, \"center\": [0, 0], \"radius\": 1},\n  \"grid\": {\"lo\": [-1, -1], \"hi\": [1, 1], \"h\": \"coarse\"},\n  \"solver\": {\"dt\": 0.01, \"snapshotEvery\": 1, \"horizon\": 1}\n}";
        let err = parse::<SimulateConfig>(Path::new("c.json"), text).unwrap_err();
        assert_eq!(err.field, "grid.h");
        assert_eq!(err.line, 3);
        assert!(err.to_string().starts_with("c.json:3:"));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = r#"{"descriptor": {"kind": "empty", "dim": 1}, "grid": {"lo": [0], "hi": [1], "h": 0.5},
            "solver": {"dt": 0.01, "snapshotEvery": 1, "horizon": 1}, "sead": 3}"#;
        let err = parse::<SimulateConfig>(Path::new("c.json"), text).unwrap_err();
        assert!(err.message.contains("sead"), "{}", err.message);
    }

    #[test]
    fn seed_defaults_to_42() {
        let text = r#"{"descriptor": {"kind": "empty", "dim": 1}, "grid": {"lo": [0], "hi": [1], "h": 0.5},
            "solver": {"dt": 0.01, "snapshotEvery": 1, "horizon": 1}}"#;
        let c: SimulateConfig = parse(Path::new("c.json"), text).unwrap();
        assert_eq!(c.seed, 42);
        assert_eq!(c.reaction, ReactionSpec::Logistic);
    }
}
