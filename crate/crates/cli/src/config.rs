//! Settings resolution: flags beat `TROPE_SENSE_*` env vars (clap handles
//! both), which beat the TOML config file, which beats built-in defaults.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;
use trope_sense::{fixtures, load_ontology, Ontology, ProtocolOptions};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("bad config {path}: {source}")]
    Toml { path: PathBuf, source: toml::de::Error },
    #[error("bad ontology {path}: {source}")]
    Ontology { path: PathBuf, source: trope_sense::OntologyError },
    #[error("theta must lie in [0, 1], got {0}")]
    Theta(f64),
    #[error("timer_turns must be at least 1")]
    TimerTurns,
}

/// The `--config` file. Every field is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub ontology_r: Option<PathBuf>,
    pub ontology_h: Option<PathBuf>,
    pub theta: Option<f64>,
    pub timer_turns: Option<u32>,
    pub seed: Option<u64>,
    pub explain: Option<bool>,
    pub output: Option<String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = read(path)?;
        toml::from_str(&text).map_err(|source| ConfigError::Toml { path: path.into(), source })
    }
}

pub fn read(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.into(), source })
}

/// Values given on the command line or through the environment.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub ontology_r: Option<PathBuf>,
    pub ontology_h: Option<PathBuf>,
    pub theta: Option<f64>,
    pub timer_turns: Option<u32>,
    pub seed: Option<u64>,
    pub explain: bool,
}

#[derive(Debug, Clone)]
pub struct CliConfig {
    pub o_r: Ontology,
    pub o_h: Ontology,
    pub seed: u64,
    pub explain: bool,
    pub options: ProtocolOptions,
}

fn ontology_at(path: Option<&Path>, fallback: fn() -> Ontology) -> Result<Ontology, ConfigError> {
    match path {
        None => Ok(fallback()),
        Some(p) => load_ontology(&read(p)?).map_err(|source| ConfigError::Ontology { path: p.into(), source }),
    }
}

impl CliConfig {
    pub fn resolve(cli: &Overrides, file: &FileConfig) -> Result<Self, ConfigError> {
        let o_r = ontology_at(cli.ontology_r.as_deref().or(file.ontology_r.as_deref()), fixtures::ontology_basic)?;
        let o_h = ontology_at(cli.ontology_h.as_deref().or(file.ontology_h.as_deref()), fixtures::ontology_user)?;
        let mut options = ProtocolOptions::default();
        if let Some(theta) = cli.theta.or(file.theta) {
            if !(0.0..=1.0).contains(&theta) {
                return Err(ConfigError::Theta(theta));
            }
            options.trope.theta = theta;
        }
        if let Some(turns) = cli.timer_turns.or(file.timer_turns) {
            if turns == 0 {
                return Err(ConfigError::TimerTurns);
            }
            options.duration = turns;
        }
        Ok(CliConfig {
            o_r,
            o_h,
            seed: cli.seed.or(file.seed).unwrap_or(0),
            explain: cli.explain || file.explain.unwrap_or(false),
            options,
        })
    }
}
