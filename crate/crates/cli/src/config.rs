use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, ValueEnum};
use horobcz_core::{QuadVal, SurfaceModel};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Every parameter a command may read. Each field can come from a flag or
/// from the `--config` JSON file; flags win.
#[derive(Args, Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Preset name (torus, golden-l, hecke-sqrt2) or path to a preset JSON file.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub surface: Option<String>,

    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,

    /// Monte-Carlo sample count (or orbit count for `plotdata gaps`).
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,

    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,

    /// Worker threads; all cores when absent.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,

    /// Height cutoff R.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<String>,

    /// Comma-separated cutoffs for `plotdata convergence`.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cutoffs: Option<String>,

    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s0: Option<String>,

    /// Box `[a, b) × (0, c)` as `a,b,c`.
    #[arg(long = "box", global = true)]
    #[serde(rename = "box", skip_serializing_if = "Option::is_none")]
    pub area: Option<String>,

    /// Level `a_n` of the conjugated section.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,

    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,

    /// Comma-separated β values for scaling tables.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub betas: Option<String>,

    /// Number of return-map steps N.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,

    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<String>,

    #[arg(long, global = true, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<String>,

    /// Level h of the starting section.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<String>,

    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_max: Option<String>,

    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y_max: Option<String>,

    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bins: Option<usize>,

    /// Iterate in exact quadratic-field arithmetic.
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<bool>,

    /// Draw the starting point at random (needs a seed).
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "true")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub random: Option<bool>,

    /// JSON file with any of the above keys.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

macro_rules! prefer_flags {
    ($flags:expr, $file:expr, $($field:ident),*) => {
        RunConfig {
            $($field: $flags.$field.or($file.$field),)*
            config: $flags.config,
        }
    };
}

impl RunConfig {
    /// Flags merged over the `--config` file, if any.
    pub fn effective(self) -> CliResult<Self> {
        let Some(path) = self.config.clone() else { return Ok(self) };
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let file: RunConfig =
            serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))?;
        Ok(prefer_flags!(
            self, file, surface, seed, samples, out, format, threads, cutoff, cutoffs, s0, area, a, beta, betas, steps,
            s, t, level, x_max, y_max, bins, exact, random
        ))
    }

    /// `key=value` pairs of every set parameter, in declaration order.
    pub fn echo(&self) -> Vec<(String, String)> {
        let value = serde_json::to_value(self).expect("config serializes");
        value
            .as_object()
            .map(|m| {
                m.iter().map(|(k, v)| (k.clone(), v.as_str().map_or_else(|| v.to_string(), str::to_string))).collect()
            })
            .unwrap_or_default()
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or_default()
    }

    pub fn surface(&self) -> CliResult<Arc<SurfaceModel>> {
        let name = self.surface.as_deref().unwrap_or("torus");
        if SurfaceModel::builtin_names().any(|n| n == name) {
            return Ok(SurfaceModel::preset(name)?);
        }
        let path = Path::new(name);
        if !path.exists() {
            let known: Vec<_> = SurfaceModel::builtin_names().collect();
            return Err(CliError::Usage(format!(
                "no preset or file named {name:?} (built-in presets: {})",
                known.join(", ")
            )));
        }
        Ok(SurfaceModel::from_path(path)?)
    }

    /// The seed, which stochastic commands must be given explicitly.
    pub fn seed(&self, what: &str) -> CliResult<u64> {
        self.seed.ok_or_else(|| CliError::Usage(format!("{what} is stochastic and needs --seed")))
    }

    pub fn samples_or(&self, default: u64) -> CliResult<u64> {
        match self.samples.unwrap_or(default) {
            0 => Err(CliError::Usage("--samples must be positive".into())),
            n => Ok(n),
        }
    }

    pub fn steps_or(&self, default: usize) -> CliResult<usize> {
        match self.steps.unwrap_or(default) {
            0 => Err(CliError::Usage("--steps must be positive".into())),
            n => Ok(n),
        }
    }

    pub fn bins_or(&self, default: usize) -> CliResult<usize> {
        match self.bins.unwrap_or(default) {
            0 => Err(CliError::Usage("--bins must be positive".into())),
            n => Ok(n),
        }
    }

    pub fn level_a(&self, default: f64) -> CliResult<f64> {
        let a = self.a.unwrap_or(default);
        if 0.0 < a && a < 1.0 {
            Ok(a)
        } else {
            Err(CliError::Usage(format!("--a must lie in (0, 1), got {a}")))
        }
    }

    pub fn beta_or(&self, default: f64) -> CliResult<f64> {
        let beta = self.beta.unwrap_or(default);
        if beta > 0.0 && beta.is_finite() {
            Ok(beta)
        } else {
            Err(CliError::Usage(format!("--beta must be positive, got {beta}")))
        }
    }

    pub fn s0_exact(&self, default: &str) -> CliResult<QuadVal> {
        let s0 = parse_quad("s0", self.s0.as_deref().unwrap_or(default))?;
        if s0.is_negative() || s0 >= QuadVal::one() {
            return Err(CliError::Usage(format!("--s0 must lie in [0, 1), got {s0}")));
        }
        Ok(s0)
    }

    pub fn s0_f64(&self, default: &str) -> CliResult<f64> {
        Ok(self.s0_exact(default)?.to_f64())
    }

    pub fn cutoff_or(&self, default: i64) -> CliResult<QuadVal> {
        let r = match &self.cutoff {
            Some(text) => parse_quad("cutoff", text)?,
            None => QuadVal::int(default),
        };
        if !r.is_positive() {
            return Err(CliError::Usage(format!("--cutoff must be positive, got {r}")));
        }
        Ok(r)
    }

    pub fn betas_or(&self, default: &[f64]) -> CliResult<Vec<f64>> {
        match &self.betas {
            None => Ok(default.to_vec()),
            Some(text) => parse_list("betas", text),
        }
    }
}

pub fn parse_quad(name: &str, text: &str) -> CliResult<QuadVal> {
    text.trim().parse().map_err(|e| CliError::Usage(format!("--{name}: cannot parse {text:?}: {e}")))
}

pub fn parse_list<T: std::str::FromStr>(name: &str, text: &str) -> CliResult<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    let items: Vec<T> = text
        .split(',')
        .map(|x| x.trim().parse().map_err(|e| CliError::Usage(format!("--{name}: cannot parse {x:?}: {e}"))))
        .collect::<CliResult<_>>()?;
    if items.is_empty() {
        return Err(CliError::Usage(format!("--{name} is empty")));
    }
    Ok(items)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        std::fs::write(&path, r#"{"seed": 5, "samples": 10, "s0": "1/3"}"#).unwrap();
        let flags = RunConfig { seed: Some(9), config: Some(path), ..RunConfig::default() };
        let cfg = flags.effective().unwrap();
        assert_eq!(cfg.seed, Some(9));
        assert_eq!(cfg.samples, Some(10));
        assert_eq!(cfg.s0.as_deref(), Some("1/3"));
    }

    #[test]
    fn unknown_config_keys_are_usage_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        std::fs::write(&path, r#"{"sede": 5}"#).unwrap();
        let err = RunConfig { config: Some(path), ..RunConfig::default() }.effective().unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn echo_lists_set_fields_only() {
        let cfg = RunConfig { seed: Some(3), area: Some("0,1/4,10".into()), ..RunConfig::default() };
        assert_eq!(
            cfg.echo(),
            vec![("seed".to_string(), "3".to_string()), ("box".to_string(), "0,1/4,10".to_string())]
        );
    }

    #[test]
    fn zero_steps_rejected() {
        let cfg = RunConfig { steps: Some(0), ..RunConfig::default() };
        assert_eq!(cfg.steps_or(10).unwrap_err().exit_code(), 2);
    }
}
