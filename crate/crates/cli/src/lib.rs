//! Command-line front end for the `qhedge` engine.
//!
//! ```text
//! qhedge <validate|price|lrm|mvh|simulate|hedge-error>
//!        --config run.toml [--out DIR] [--seed N] [--threads N]
//! ```
//!
//! Every run writes its tables (CSV) and reports (JSON) into the output
//! directory together with a `manifest.json` that reproduces it.

pub mod commands;
pub mod config;
pub mod error;
pub mod ingest;
pub mod manifest;

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::ValueEnum;

pub use config::{Loaded, RunConfig};
pub use error::{CliError, Result};
pub use ingest::ingest_csv;
pub use manifest::{Manifest, OutputFile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Check the model against the standing assumptions.
    Validate,
    /// Initial capital c̃ per strike.
    Price,
    /// LRM ratios ξ̃ along the observed path.
    Lrm,
    /// Full MVH report per strike, plus the strategy-vs-strike tables.
    Mvh,
    /// Monte Carlo ensemble statistics.
    Simulate,
    /// Hedging-error comparison: MVH vs LRM vs no hedge.
    HedgeError,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Price => "price",
            Command::Lrm => "lrm",
            Command::Mvh => "mvh",
            Command::Simulate => "simulate",
            Command::HedgeError => "hedge-error",
        }
    }
}

/// Command-line overrides of the config.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

#[derive(Debug)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub manifest: Manifest,
    pub stdout: String,
    /// `Some(false)` when `validate` rejected the model.
    pub model_ok: Option<bool>,
}

/// Resolves the config, runs one subcommand and writes the manifest.
pub fn run(command: Command, config_file: &Path, overrides: &Overrides) -> Result<RunSummary> {
    let start = Instant::now();
    let (mut cfg, mut threads) = match RunConfig::load(config_file)? {
        Loaded::Config(cfg) => (cfg, None),
        Loaded::Manifest(m) => {
            if m.subcommand != command.name() {
                return Err(CliError::Config(format!(
                    "manifest was written by `{}`, not `{}`",
                    m.subcommand,
                    command.name()
                )));
            }
            if let (Some(path), Some(digest)) = (&m.config.path, &m.path_sha256) {
                if manifest::file_sha256(path)? != *digest {
                    return Err(CliError::Config(format!(
                        "{} changed since the manifest was written",
                        path.display()
                    )));
                }
            }
            (m.config, m.threads)
        }
    };
    if let Some(seed) = overrides.seed {
        cfg.mc.seed = seed;
    }
    if let Some(out) = &overrides.out {
        cfg.out = Some(out.clone());
    }
    if overrides.threads.is_some() {
        threads = overrides.threads;
    }
    if threads == Some(0) {
        return Err(CliError::Config("--threads must be at least 1".into()));
    }
    cfg.validate()?;
    let out_dir = cfg
        .out
        .as_deref()
        .ok_or_else(|| CliError::Config("no output directory: pass --out or set `out`".into()))
        .and_then(commands::absolute)?;
    cfg.out = Some(out_dir.clone());
    cfg.path = cfg.path.as_deref().map(commands::absolute).transpose()?;
    let path_sha256 = cfg.path.as_deref().map(manifest::file_sha256).transpose()?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let mut out = manifest::OutDir::create(&out_dir)?;
    let outcome = pool.install(|| match command {
        Command::Validate => commands::validate(&cfg, &mut out),
        Command::Price => commands::price(&cfg, &mut out),
        Command::Lrm => commands::lrm(&cfg, &mut out),
        Command::Mvh => commands::mvh(&cfg, &mut out),
        Command::Simulate => commands::simulate(&cfg, &mut out),
        Command::HedgeError => commands::hedge_error(&cfg, &mut out),
    })?;

    let manifest = Manifest {
        manifest_version: manifest::MANIFEST_VERSION,
        subcommand: command.name().to_string(),
        cli_version: env!("CARGO_PKG_VERSION").to_string(),
        engine_version: qhedge::VERSION.to_string(),
        config: cfg,
        path_sha256,
        threads,
        elapsed_seconds: start.elapsed().as_secs_f64(),
        outputs: out.into_outputs(),
    };
    let mut text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Numerical(e.to_string()))?;
    text.push('\n');
    let path = out_dir.join(manifest::MANIFEST_FILE);
    std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
    Ok(RunSummary {
        out_dir,
        manifest,
        stdout: outcome.stdout,
        model_ok: outcome.model_ok,
    })
}
