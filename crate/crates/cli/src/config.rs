//! TOML configuration files. Every key is optional; command-line flags take
//! precedence over the file and the file over built-in defaults.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub m: Option<f64>,
    pub temp: Option<f64>,
    pub beta: Option<f64>,
    pub omega: Option<f64>,
    pub order: Option<usize>,
    pub t_grid: Option<GridSpec>,
    pub omega_grid: Option<GridSpec>,
    pub output: Option<PathBuf>,
    pub h: Option<f64>,
    pub fields: Option<PathBuf>,
    pub m_z0: Option<f64>,
    pub m_y0: Option<f64>,
    pub m_x0: Option<f64>,
    pub t_max: Option<f64>,
    pub dt: Option<f64>,
    pub stride: Option<usize>,
    pub n: Option<usize>,
    pub random_patterns: Option<usize>,
    pub patterns: Option<PathBuf>,
    pub seed: Option<u64>,
    pub initial: Option<usize>,
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }
}

/// An evenly spaced axis `start, …, stop` with `count` points, written
/// `start:stop:count` on the command line and `[start, stop, count]` in TOML.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct GridSpec(pub f64, pub f64, pub usize);

impl GridSpec {
    pub fn validate(&self, name: &str) -> Result<(), CliError> {
        let GridSpec(start, stop, count) = *self;
        if count == 0 {
            return Err(CliError::Usage(format!("{name}: count must be at least 1")));
        }
        if !(start.is_finite() && stop.is_finite()) || start > stop {
            return Err(CliError::Usage(format!("{name}: need finite start <= stop, got {start}:{stop}")));
        }
        if start < 0.0 {
            return Err(CliError::Usage(format!("{name}: values must be >= 0, got {start}")));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let GridSpec(start, stop, count) = *self;
        if count == 1 {
            return vec![start];
        }
        (0..count)
            .map(|k| start + (stop - start) * k as f64 / (count - 1) as f64)
            .collect()
    }
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [start, stop, count] = parts[..] else {
            return Err(format!("expected start:stop:count, got {s:?}"));
        };
        let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}"));
        let count = count.trim().parse::<usize>().map_err(|e| format!("{count:?}: {e}"))?;
        Ok(GridSpec(num(start)?, num(stop)?, count))
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.0, self.1, self.2)
    }
}

/// Resolves `β` from the flag pair, then the file pair. `--temp 0` means
/// `β = ∞`.
pub fn resolve_beta(
    flag_temp: Option<f64>,
    flag_beta: Option<f64>,
    config: &Config,
) -> Result<Option<f64>, CliError> {
    let pick = |temp: Option<f64>, beta: Option<f64>, origin: &str| match (temp, beta) {
        (Some(_), Some(_)) => Err(CliError::Usage(format!("{origin} sets both temp and beta"))),
        (Some(t), None) if t.is_nan() || t < 0.0 => Err(CliError::Usage(format!("temperature must be >= 0, got {t}"))),
        (Some(t), None) => Ok(Some(1.0 / t)),
        (None, Some(b)) if b.is_nan() || b < 0.0 => Err(CliError::Usage(format!("beta must be >= 0, got {b}"))),
        (None, b) => Ok(b),
    };
    match pick(flag_temp, flag_beta, "the command line")? {
        Some(b) => Ok(Some(b)),
        None => pick(config.temp, config.beta, "the config file"),
    }
}
