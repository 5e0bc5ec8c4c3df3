//! Experiment configuration: built-in defaults, overridden by a key=value
//! file, overridden by command-line flags.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use gprlab_core::{sigma2_from_rho_db, validate_params, McConfig, RawParams, SystemParams};
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};

/// Optional value for every configurable field.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub n_t: Option<usize>,
    pub n_r: Option<usize>,
    pub rho_db: Option<f64>,
    pub rate: Option<f64>,
    pub p_max: Option<f64>,
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub grid_points: Option<usize>,
    pub resolution: Option<u32>,
    pub out: Option<PathBuf>,
}

fn parse_value<T: FromStr>(key: &str, value: &str, line: usize) -> CliResult<T> {
    value
        .parse()
        .map_err(|_| CliError::config(format!("line {line}: cannot parse `{value}` for `{key}`")))
}

impl Overrides {
    /// Parses line-oriented `key = value` text. Blank lines and lines
    /// starting with `#` are skipped; keys accept `-` or `_`.
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut o = Overrides::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let entry = raw.trim();
            if entry.is_empty() || entry.starts_with('#') {
                continue;
            }
            let (key, value) = entry.split_once('=').ok_or_else(|| {
                CliError::config(format!("line {line}: expected key=value, got `{entry}`"))
            })?;
            let key = key.trim().replace('-', "_");
            let value = value.trim();
            match key.as_str() {
                "nt" | "n_t" => o.n_t = Some(parse_value(&key, value, line)?),
                "nr" | "n_r" => o.n_r = Some(parse_value(&key, value, line)?),
                "rho_db" => o.rho_db = Some(parse_value(&key, value, line)?),
                "rate" => o.rate = Some(parse_value(&key, value, line)?),
                "pmax" | "p_max" => o.p_max = Some(parse_value(&key, value, line)?),
                "seed" => o.seed = Some(parse_value(&key, value, line)?),
                "trials" => o.trials = Some(parse_value(&key, value, line)?),
                "grid_points" => o.grid_points = Some(parse_value(&key, value, line)?),
                "resolution" => o.resolution = Some(parse_value(&key, value, line)?),
                "out" => o.out = Some(PathBuf::from(value)),
                _ => {
                    return Err(CliError::config(format!(
                        "line {line}: unknown key `{key}`"
                    )))
                }
            }
        }
        Ok(o)
    }

    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    fn apply(&self, cfg: &mut ExperimentConfig) {
        macro_rules! take {
            ($($f:ident),*) => { $( if let Some(v) = &self.$f { cfg.$f = v.clone(); } )* };
        }
        take!(
            n_t,
            n_r,
            rho_db,
            rate,
            p_max,
            seed,
            trials,
            grid_points,
            resolution,
            out
        );
    }
}

/// Fully resolved settings of one command.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub command: String,
    pub n_t: usize,
    pub n_r: usize,
    pub rho_db: f64,
    pub rate: f64,
    pub p_max: f64,
    pub seed: u64,
    pub trials: u64,
    pub grid_points: usize,
    pub resolution: u32,
    pub out: PathBuf,
}

impl ExperimentConfig {
    /// Defaults shared by every command; commands adjust a copy.
    pub fn base(command: impl Into<String>) -> Self {
        Self {
            command: command.into(),
            n_t: 1,
            n_r: 1,
            rho_db: 10.0,
            rate: 1.0,
            p_max: 1.0,
            seed: 1,
            trials: 100_000,
            grid_points: 64,
            resolution: 32,
            out: PathBuf::from("out"),
        }
    }

    /// Layers `file` and then `flags` over `defaults` and validates.
    pub fn resolve(
        mut defaults: Self,
        file: Option<&Overrides>,
        flags: &Overrides,
    ) -> CliResult<Self> {
        if let Some(f) = file {
            f.apply(&mut defaults);
        }
        flags.apply(&mut defaults);
        defaults.validate()?;
        Ok(defaults)
    }

    fn validate(&self) -> CliResult<()> {
        if !self.rho_db.is_finite() {
            return Err(CliError::config("rho_db must be finite"));
        }
        self.params()?;
        if self.trials == 0 {
            return Err(CliError::config("trials must be positive"));
        }
        if self.grid_points < 3 {
            return Err(CliError::config("grid_points must be at least 3"));
        }
        if self.resolution == 0 {
            return Err(CliError::config("resolution must be positive"));
        }
        Ok(())
    }

    pub fn raw(&self) -> RawParams {
        RawParams {
            n_t: self.n_t,
            n_r: self.n_r,
            sigma2: sigma2_from_rho_db(self.rho_db),
            rate: self.rate,
            p_max: self.p_max,
        }
    }

    pub fn params(&self) -> CliResult<SystemParams> {
        validate_params(self.raw()).map_err(|e| CliError::config(e.to_string()))
    }

    pub fn mc(&self) -> CliResult<McConfig> {
        McConfig::new(self.seed, self.trials).map_err(|e| CliError::config(e.to_string()))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "command": self.command,
            "n_t": self.n_t,
            "n_r": self.n_r,
            "rho_db": self.rho_db,
            "rate": self.rate,
            "p_max": self.p_max,
            "seed": self.seed,
            "trials": self.trials,
            "grid_points": self.grid_points,
            "resolution": self.resolution,
            "out": self.out.display().to_string(),
        })
    }
}
