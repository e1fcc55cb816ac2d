//! Run configuration: file contents merged with command-line flags.

use std::path::{Path, PathBuf};

use cqd_core::atom::{ApparatusOverrides, ApparatusParams, AtomOverrides, AtomParams, ParamsFile};
use serde::Deserialize;

/// Environment variable naming the default configuration file.
pub const CONFIG_ENV: &str = "CQD_CONFIG";

pub const DEFAULT_SEED: u64 = 1;

/// Configuration file contents (TOML, or JSON when the text starts with `{`).
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub atom: AtomOverrides,
    #[serde(default)]
    pub apparatus: ApparatusOverrides,
    pub kappa: Option<f64>,
    pub k_i: Option<f64>,
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| e.to_string())
        } else {
            toml::from_str(text).map_err(|e| e.to_string())
        }
    }
}

/// Fully resolved parameters for one run.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub source: Option<PathBuf>,
    pub atom: AtomParams,
    pub apparatus: ApparatusParams,
    pub kappa: f64,
    pub k_i: f64,
    pub seed: u64,
}

/// Error in the configuration itself, reported as a usage error.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn read(path: &Path) -> anyhow::Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
    RunConfig::parse(&text)
        .map_err(|e| ConfigError(format!("invalid config {}: {e}", path.display())).into())
}

/// Loads the configuration file if one is given, otherwise the built-in
/// defaults. Flags override file values.
pub fn resolve(path: Option<&Path>, seed: Option<u64>, k_i: Option<f64>) -> anyhow::Result<Resolved> {
    let source = path.map(Path::to_path_buf);
    let file = match &source {
        Some(p) => read(p)?,
        None => RunConfig::default(),
    };
    let params = ParamsFile {
        atom: file.atom.clone(),
        apparatus: file.apparatus.clone(),
        kappa: file.kappa,
    };
    let atom = params.resolve_atom().map_err(|e| ConfigError(e.to_string()))?;
    let apparatus = params.resolve_apparatus().map_err(|e| ConfigError(e.to_string()))?;
    let k_i = k_i.or(file.k_i).unwrap_or(0.0);
    if !(k_i >= 0.0 && k_i.is_finite()) {
        return Err(ConfigError(format!("k_i must be non-negative, got {k_i}")).into());
    }
    Ok(Resolved {
        source,
        atom,
        apparatus,
        kappa: params.kappa(),
        k_i,
        seed: seed.or(file.seed).unwrap_or(DEFAULT_SEED),
    })
}
