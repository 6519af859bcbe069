use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};

use super::config::RunConfig;
use super::CliError;
use crate::params::MediumParams;

/// Bumped whenever a column changes meaning or order.
pub const SCHEMA_VERSION: u32 = 1;

/// Audit block embedded in every emitted file.
#[derive(Debug, Clone, Serialize)]
pub struct Metadata {
    pub tool: &'static str,
    pub version: &'static str,
    pub schema_version: u32,
    pub command: &'static str,
    pub seed: u64,
    pub params: MediumParams,
    pub settings: Value,
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

impl Metadata {
    pub fn new(cfg: &RunConfig) -> Self {
        Metadata {
            tool: "chi3",
            version: env!("CARGO_PKG_VERSION"),
            schema_version: SCHEMA_VERSION,
            command: cfg.command.name(),
            seed: cfg.settings.seed,
            params: cfg.params,
            settings: serde_json::to_value(&cfg.settings).unwrap_or(Value::Null),
            extra: Map::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Serialize) -> Self {
        self.extra.insert(key.to_string(), serde_json::to_value(value).unwrap_or(Value::Null));
        self
    }

    fn comment_lines(&self) -> String {
        let mut s = String::new();
        let v = serde_json::to_value(self).unwrap_or(Value::Null);
        if let Value::Object(map) = v {
            for (k, v) in map {
                let _ = writeln!(s, "# {k}: {v}");
            }
        }
        s
    }
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))
}

fn write(path: &Path, text: &str) -> Result<PathBuf, CliError> {
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(path.to_path_buf())
}

/// CSV with a `#`-commented metadata block, then the header row. Numbers use
/// the shortest representation that round-trips.
pub fn csv_string(meta: &Metadata, header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut s = meta.comment_lines();
    s.push_str(&header.join(","));
    s.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

pub fn write_csv(path: &Path, meta: &Metadata, header: &[&str], rows: &[Vec<f64>]) -> Result<PathBuf, CliError> {
    write(path, &csv_string(meta, header, rows))
}

pub fn write_json<T: Serialize>(path: &Path, meta: &Metadata, data: &T) -> Result<PathBuf, CliError> {
    #[derive(Serialize)]
    struct Doc<'a, T> {
        metadata: &'a Metadata,
        data: &'a T,
    }
    let text = serde_json::to_string_pretty(&Doc { metadata: meta, data })
        .map_err(|e| CliError::Io(format!("json encoding: {e}")))?;
    write(path, &(text + "\n"))
}

pub fn write_svg(path: &Path, meta: &Metadata, svg: &str) -> Result<PathBuf, CliError> {
    let json = serde_json::to_string(meta).unwrap_or_default().replace("--", "- -");
    let body = svg.replacen("<svg ", &format!("<!-- {json} -->\n<svg "), 1);
    write(path, &body)
}

#[cfg(test)]
mod tests {
    use super::super::config::{resolve, Command};
    use super::*;

    #[test]
    fn csv_has_metadata_and_header() {
        let cfg = resolve(Command::Spectrum, None, &[], &[], None).unwrap();
        let meta = Metadata::new(&cfg).with("model", "hm");
        let s = csv_string(&meta, &["a", "b"], &[vec![1.0, -0.5], vec![2.5e-7, 0.0]]);
        assert!(s.starts_with("# "));
        assert!(s.contains("# schema_version: 1"));
        assert!(s.contains("# model: \"hm\""));
        assert!(s.contains("\"gamma\":100000000.0"));
        let data: Vec<&str> = s.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(data, vec!["a,b", "1e0,-5e-1", "2.5e-7,0e0"]);
    }
}
