use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use super::CliError;
use crate::linearized::{DriftForm, Quadrature};
use crate::params::{MediumParams, Model, RegimeThresholds};

/// Keys of the flat config file that belong to [`MediumParams`]; every other
/// key is a run setting.
pub const PARAM_KEYS: [&str; 13] = [
    "gamma",
    "gamma1",
    "gamma2",
    "delta",
    "g",
    "n_atoms",
    "f1s",
    "f2s",
    "c_in",
    "c_out",
    "a0",
    "omega_offset",
    "fc",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Spectrum,
    Compare,
    Simulate,
    Invfree,
    Check,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Compare => "compare",
            Command::Simulate => "simulate",
            Command::Invfree => "invfree",
            Command::Check => "check",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl FromStr for Format {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "svg" => Ok(Format::Svg),
            other => Err(CliError::Usage(format!("unknown format `{other}`"))),
        }
    }
}

/// Frequency grid `MIN:MAX:N`. Scaled grids are in units of the field decay
/// rate A, unscaled ones in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub scaled: bool,
}

impl FromStr for Grid {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        let bad = || CliError::Usage(format!("grid `{s}` is not MIN:MAX:N"));
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let min: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let max: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let points: usize = parts[2].trim().parse().map_err(|_| bad())?;
        if points < 2 {
            return Err(CliError::Usage("grid needs at least 2 points".into()));
        }
        if !(min.is_finite() && max.is_finite() && max > min) {
            return Err(CliError::Usage(format!("grid bounds must be finite with MAX > MIN (got {min}, {max})")));
        }
        Ok(Grid { min, max, points, scaled: true })
    }
}

impl Grid {
    /// Grid in ω̄ for a system with decay rate `decay`.
    pub fn omega_bar(&self, decay: f64) -> Vec<f64> {
        let scale = if self.scaled { 1.0 } else { 1.0 / decay };
        let step = (self.max - self.min) / (self.points - 1) as f64;
        (0..self.points).map(|i| (self.min + step * i as f64) * scale).collect()
    }
}

/// Run settings as they appear in the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Settings {
    pub models: String,
    pub grid: String,
    /// `false` reads the grid in rad/s.
    pub scaled: bool,
    pub out: String,
    pub formats: String,
    pub seed: u64,
    pub ntraj: usize,
    pub drift_form: DriftForm,
    /// Quadrature simulated by `simulate`.
    pub quadrature: Quadrature,
    /// Welch segments per trajectory.
    pub segments: usize,
    pub segment_len: usize,
    /// Also write every sampled trajectory as a binary dump.
    pub dump: bool,
    pub log_scale: bool,
    /// Plot 1 + ηg instead of g.
    pub photocurrent: bool,
    pub eta: f64,
    pub tol_weak: f64,
    pub tol_x: f64,
    pub tol_frac: f64,
    pub invfree_q0: f64,
    pub invfree_beta: f64,
    pub invfree_x: f64,
    pub invfree_a0: f64,
    /// Total cavity loss for `invfree`; defaults to c_in + c_out.
    pub invfree_c: Option<f64>,
    pub sweep_points: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            models: "eha,hm,slm".into(),
            grid: "-5:5:401".into(),
            scaled: true,
            out: "chi3-out".into(),
            formats: "csv,json,svg".into(),
            seed: 0,
            ntraj: 200,
            drift_form: DriftForm::Exact,
            quadrature: Quadrature::Amplitude,
            segments: 16,
            segment_len: 2048,
            dump: false,
            log_scale: false,
            photocurrent: false,
            eta: 1.0,
            tol_weak: 0.1,
            tol_x: 10.0,
            tol_frac: 0.1,
            invfree_q0: 10.0,
            invfree_beta: 0.01,
            invfree_x: 0.0,
            invfree_a0: 0.0,
            invfree_c: None,
            sweep_points: 61,
        }
    }
}

/// Fully resolved configuration of one invocation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub params: MediumParams,
    pub models: Vec<Model>,
    pub grid: Grid,
    pub out: PathBuf,
    pub formats: Vec<Format>,
    pub settings: Settings,
    /// Worker cap from CHI3_THREADS.
    pub threads: Option<usize>,
}

impl RunConfig {
    pub fn thresholds(&self) -> RegimeThresholds {
        RegimeThresholds { tol_weak: self.settings.tol_weak, tol_x: self.settings.tol_x, tol_frac: self.settings.tol_frac }
    }

    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }
}

/// Parses the right-hand side of `key=value` as a TOML value, falling back to
/// a bare string.
fn parse_value(raw: &str) -> Value {
    match format!("v = {raw}").parse::<Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| Value::String(raw.into())),
        Err(_) => Value::String(raw.into()),
    }
}

/// Layers, lowest first: built-in defaults, the config file, `--set`
/// assignments, then explicit flags (`flags`, already as key/value pairs).
pub fn resolve(
    command: Command,
    file: Option<&Path>,
    sets: &[String],
    flags: &[(&str, Value)],
    threads: Option<usize>,
) -> Result<RunConfig, CliError> {
    let mut table = match file {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            text.parse::<Table>().map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?
        }
        None => Table::new(),
    };
    for s in sets {
        let (k, v) = s.split_once('=').ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, got `{s}`")))?;
        table.insert(k.trim().to_string(), parse_value(v.trim()));
    }
    for (k, v) in flags {
        table.insert(k.to_string(), v.clone());
    }
    // integer literals are fine for float parameters
    let mut params = Table::new();
    let mut run = Table::new();
    for (k, v) in table {
        if PARAM_KEYS.contains(&k.as_str()) {
            let v = match v {
                Value::Integer(i) => Value::Float(i as f64),
                other => other,
            };
            params.insert(k, v);
        } else {
            run.insert(k, v);
        }
    }
    let params: MediumParams =
        Value::Table(params).try_into().map_err(|e| CliError::Usage(format!("parameters: {e}")))?;
    let settings: Settings = Value::Table(run).try_into().map_err(|e| CliError::Usage(format!("settings: {e}")))?;

    let models = split_list(&settings.models)
        .map(|m| m.parse::<Model>().map_err(|e| CliError::Usage(e.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    if models.is_empty() {
        return Err(CliError::Usage("model list is empty".into()));
    }
    let formats = split_list(&settings.formats).map(Format::from_str).collect::<Result<Vec<_>, _>>()?;
    if formats.is_empty() {
        return Err(CliError::Usage("format list is empty".into()));
    }
    let mut grid: Grid = settings.grid.parse()?;
    grid.scaled = settings.scaled;
    if settings.ntraj < 2 {
        return Err(CliError::Usage("ntraj must be at least 2".into()));
    }
    if settings.segments == 0 || settings.segment_len < 4 || settings.sweep_points < 2 {
        return Err(CliError::Usage("segments >= 1, segment_len >= 4 and sweep_points >= 2 required".into()));
    }
    Ok(RunConfig {
        command,
        params,
        models,
        grid,
        out: PathBuf::from(&settings.out),
        formats,
        settings,
        threads,
    })
}

fn split_list(s: &str) -> impl Iterator<Item = &str> {
    s.split(',').map(str::trim).filter(|p| !p.is_empty())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(sets: &[&str]) -> Result<RunConfig, CliError> {
        let sets: Vec<String> = sets.iter().map(|s| s.to_string()).collect();
        resolve(Command::Spectrum, None, &sets, &[], None)
    }

    #[test]
    fn defaults() {
        let cfg = run(&[]).unwrap();
        assert_eq!(cfg.params, MediumParams::default());
        assert_eq!(cfg.models, Model::ALL.to_vec());
        assert_eq!(cfg.grid, Grid { min: -5.0, max: 5.0, points: 401, scaled: true });
        assert_eq!(cfg.settings.seed, 0);
        assert_eq!(cfg.formats.len(), 3);
    }

    #[test]
    fn layering() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.toml");
        std::fs::write(&path, "gamma = 3\nseed = 5\nmodels = \"hm\"\n").unwrap();
        let cfg = resolve(
            Command::Spectrum,
            Some(&path),
            &["seed=6".into(), "drift_form=\"weak-field\"".into(), "fc=0.5".into()],
            &[("seed", Value::Integer(7))],
            None,
        )
        .unwrap();
        assert_eq!(cfg.params.gamma, 3.0);
        assert_eq!(cfg.params.fc, 0.5);
        assert_eq!(cfg.settings.seed, 7);
        assert_eq!(cfg.models, vec![Model::Hm]);
        assert_eq!(cfg.settings.drift_form, DriftForm::WeakField);
        // bare strings need no quotes
        assert_eq!(run(&["models=slm"]).unwrap().models, vec![Model::Slm]);
    }

    #[test]
    fn usage_errors() {
        for bad in [&["models="][..], &["formats="], &["grid=1:0:5"], &["grid=0:1:1"], &["nonsense=1"], &["gamma=\"x\""], &["models=abc"]] {
            assert!(matches!(run(bad), Err(CliError::Usage(_))), "{bad:?}");
        }
    }

    #[test]
    fn unscaled_grid() {
        let mut g: Grid = "0:2e7:3".parse().unwrap();
        g.scaled = false;
        assert_eq!(g.omega_bar(1e7), vec![0.0, 1.0, 2.0]);
    }
}
