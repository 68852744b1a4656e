//! Run configuration (TOML or JSON).
//!
//! ```toml
//! schema_version = 1
//! path = "spx.csv"          # relative to this file
//!
//! [model]
//! variant = "variance_gamma"
//! C = 6.7910
//! G = 30.1807
//! M = 33.1507
//! S0 = 2000.0
//! T = 1.0
//!
//! [claims]
//! strikes = [1900.0, 2000.0, 2100.0]
//!
//! [mc]
//! paths = 10000
//! steps = 250
//! seed = 7
//! ```
//!
//! `[grid]` takes the Fourier grid keys and defaults to the engine's grid.
//! A manifest written by a previous run is also accepted in place of a
//! config; its embedded config is used as is.

use std::path::{Path, PathBuf};

use qhedge::simulation::Measure;
use qhedge::{ClaimSpec, FourierGrid, LevyModel, ModelSpec};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::manifest::Manifest;

pub const SCHEMA_VERSION: u32 = 1;

pub const MAX_PATHS: usize = 100_000_000;
pub const MAX_STEPS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub model: ModelSpec,
    #[serde(default)]
    pub grid: FourierGrid,
    pub claims: ClaimsConfig,
    /// Observed prices for `lrm` and `mvh`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    /// Date the strategy is posted for; defaults to one step after the last
    /// observation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report_time: Option<f64>,
    #[serde(default)]
    pub mc: McConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ClaimKind {
    #[default]
    Call,
    Underlying,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClaimsConfig {
    #[serde(default)]
    pub kind: ClaimKind,
    #[serde(default)]
    pub strikes: Vec<f64>,
    /// Defaults to the model horizon `T`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub maturity: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McConfig {
    pub paths: usize,
    pub steps: usize,
    pub seed: u64,
    /// Measure for `simulate`; backtests always run under P.
    pub measure: Measure,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            paths: 10_000,
            steps: 250,
            seed: 0,
            measure: Measure::P,
        }
    }
}

/// A loaded config, or the config embedded in a manifest.
#[derive(Debug, Clone)]
pub enum Loaded {
    Config(RunConfig),
    Manifest(Box<Manifest>),
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Reads a config or manifest. Relative paths in a config resolve against
    /// its directory.
    pub fn load(file: &Path) -> Result<Loaded> {
        let text = std::fs::read_to_string(file).map_err(|e| CliError::io(file, e))?;
        let ext = file.extension().and_then(|e| e.to_str());
        let mut cfg = match ext {
            Some("toml") => Self::from_toml_str(&text)?,
            Some("json") => {
                let value: serde_json::Value =
                    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", file.display())))?;
                if value.get("manifest_version").is_some() {
                    let m: Manifest = serde_json::from_value(value)
                        .map_err(|e| CliError::Config(format!("{}: {e}", file.display())))?;
                    return Ok(Loaded::Manifest(Box::new(m)));
                }
                serde_json::from_value(value).map_err(|e| CliError::Config(format!("{}: {e}", file.display())))?
            }
            _ => {
                return Err(CliError::Config(format!(
                    "{}: expected a .toml or .json extension",
                    file.display()
                )))
            }
        };
        let base = file.parent().unwrap_or(Path::new("."));
        cfg.path = cfg.path.map(|p| base.join(p));
        cfg.out = cfg.out.map(|p| base.join(p));
        Ok(Loaded::Config(cfg))
    }

    /// Checks the documented invariants.
    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.model.build()?;
        if self.claims.kind == ClaimKind::Call && self.claims.strikes.is_empty() {
            return Err(CliError::Config("claims.strikes must not be empty".into()));
        }
        if let Some(k) = self.claims.strikes.iter().find(|k| !(k.is_finite() && **k > 0.0)) {
            return Err(CliError::Config(format!("claims.strikes: {k} is not a positive strike")));
        }
        if let Some(t) = self.claims.maturity {
            if t != self.model.maturity {
                return Err(CliError::Config(format!(
                    "claims.maturity {t} must equal the model horizon T = {}",
                    self.model.maturity
                )));
            }
        }
        if let Some(p) = &self.path {
            if !p.is_file() {
                return Err(CliError::Config(format!("path {} does not exist", p.display())));
            }
        }
        if !(2..=MAX_PATHS).contains(&self.mc.paths) {
            return Err(CliError::Config(format!("mc.paths must lie in [2, {MAX_PATHS}]")));
        }
        if !(1..=MAX_STEPS).contains(&self.mc.steps) {
            return Err(CliError::Config(format!("mc.steps must lie in [1, {MAX_STEPS}]")));
        }
        Ok(())
    }

    pub fn build_model(&self) -> Result<LevyModel> {
        Ok(self.model.build()?)
    }

    pub fn claims(&self) -> Result<Vec<ClaimSpec>> {
        let t = self.claims.maturity.unwrap_or(self.model.maturity);
        match self.claims.kind {
            ClaimKind::Underlying => Ok(vec![ClaimSpec::underlying(t)]),
            ClaimKind::Call => self
                .claims
                .strikes
                .iter()
                .map(|&k| ClaimSpec::call(k, t).map_err(CliError::from))
                .collect(),
        }
    }
}
