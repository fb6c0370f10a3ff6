use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::args::{Mode, TrainerChoice};
use crate::error::{CliError, CliResult, Context};

/// Parses a TOML file, or JSON when the extension is `.json`. Unknown keys
/// are rejected by the target types.
pub fn load<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).input_context(|| format!("cannot read {}", path.display()))?;
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if is_json {
        serde_json::from_str(&text).input_context(|| format!("invalid JSON in {}", path.display()))
    } else {
        toml::from_str(&text).input_context(|| format!("invalid TOML in {}", path.display()))
    }
}

/// File-level options for `curriculum`.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurriculumConfig {
    pub base: Option<usize>,
    pub increment: Option<usize>,
    pub mode: Option<Mode>,
    pub active_size: Option<usize>,
    pub trainer: Option<TrainerChoice>,
    pub components: Option<usize>,
    pub seed: Option<u64>,
}

/// File-level options for `simulate`.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub seeds: Option<Vec<u64>>,
    pub base: Option<usize>,
    pub increment: Option<usize>,
    pub k: Option<usize>,
    pub target_geomean: Option<f64>,
    pub active_size: Option<usize>,
    pub trainer: Option<TrainerChoice>,
    pub components: Option<usize>,
}

pub fn required<T>(value: Option<T>, flag: &str) -> CliResult<T> {
    value.ok_or_else(|| CliError::input(anyhow::anyhow!("missing required option --{flag}")))
}

pub fn parse_seeds(text: &str) -> CliResult<Vec<u64>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<u64>().input_context(|| format!("invalid seed {s:?}")))
        .collect()
}
