//! Experiment runners for the prestige simulator. Each scenario takes a
//! serde config with defaults, returns CSV tables plus a summary of
//! pass/fail trend checks, and is deterministic for a given config.

pub mod bbc;
pub mod config;
pub mod dag_study;
pub mod decay;
pub mod forest;
pub mod gain;
pub mod global;
pub mod output;
pub mod stats;
pub mod theorems;
pub mod tradeoff;

use pop_core::MiningMode;
use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

pub use config::ConfigError;
pub use output::{ScenarioOutput, Summary, Table};
pub use theorems::{corrupted_retain, run_theorem_checks, TheoremConfig, TheoremReport};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("unknown scenario `{0}`; valid names: {names}", names = names().join(", "))]
    UnknownScenario(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("invalid scenario setup: {0}")]
    Invalid(String),
    #[error("scenario failed: {0}")]
    Runtime(String),
}

impl ScenarioError {
    /// Config-side problems, as opposed to failures while running.
    pub fn is_usage(&self) -> bool {
        !matches!(self, ScenarioError::Runtime(_))
    }
}

/// `both`, `simple` or `progressive`.
pub fn parse_modes(raw: &str) -> Result<Vec<MiningMode>, ScenarioError> {
    if raw == "both" {
        return Ok(MiningMode::ALL.to_vec());
    }
    raw.parse::<MiningMode>()
        .map(|m| vec![m])
        .map_err(|e| ScenarioError::Invalid(format!("mode: {e}")))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScenarioInfo {
    pub name: &'static str,
    pub description: &'static str,
    /// Config has a `seed` field.
    pub seeded: bool,
    /// Config has a `mode` field.
    pub moded: bool,
    /// Config has a `scale` field.
    pub scaled: bool,
}

const fn info(name: &'static str, description: &'static str, seeded: bool, moded: bool, scaled: bool) -> ScenarioInfo {
    ScenarioInfo { name, description, seeded, moded, scaled }
}

pub const SCENARIOS: &[ScenarioInfo] = &[
    info("decay", "prestige trajectories toward the static value, with a spike and a removal", false, false, false),
    info("gain", "prestige gained above the static value against decay and injection", false, false, false),
    info("dag", "gain by distance, base prestige and task count over random DAGs", true, true, false),
    info("global", "poor and rich cohorts with different work rates on the chain", true, true, false),
    info("tradeoff", "cumulative prestige of wealth against work across decay values", true, false, false),
    info("bbc", "season distribution through viewer trees and budget split", true, false, true),
    info("theorems", "randomized checks of the split and conservation guarantees", true, false, false),
];

pub fn names() -> Vec<&'static str> {
    SCENARIOS.iter().map(|s| s.name).collect()
}

pub fn lookup(name: &str) -> Result<&'static ScenarioInfo, ScenarioError> {
    SCENARIOS
        .iter()
        .find(|s| s.name == name)
        .ok_or_else(|| ScenarioError::UnknownScenario(name.to_string()))
}

fn load_and_run<T, F>(file: Option<&str>, overrides: &[(String, String)], run: F) -> Result<ScenarioOutput, ScenarioError>
where
    T: Default + Serialize + DeserializeOwned,
    F: FnOnce(&T) -> Result<ScenarioOutput, ScenarioError>,
{
    let cfg: T = config::load(file, overrides)?;
    run(&cfg)
}

/// Runs a scenario by name. `file` is TOML text, not a path.
pub fn run_named(name: &str, file: Option<&str>, overrides: &[(String, String)]) -> Result<ScenarioOutput, ScenarioError> {
    match lookup(name)?.name {
        "decay" => load_and_run(file, overrides, decay::run),
        "gain" => load_and_run(file, overrides, gain::run),
        "dag" => load_and_run(file, overrides, dag_study::run),
        "global" => load_and_run(file, overrides, global::run),
        "tradeoff" => load_and_run(file, overrides, tradeoff::run),
        "bbc" => load_and_run(file, overrides, bbc::run),
        "theorems" => load_and_run(file, overrides, theorems::run),
        other => unreachable!("registry entry {other} has no runner"),
    }
}

/// Default config of a scenario as TOML.
pub fn default_config(name: &str) -> Result<String, ScenarioError> {
    let text = match lookup(name)?.name {
        "decay" => config::render_default::<decay::DecayConfig>(),
        "gain" => config::render_default::<gain::GainConfig>(),
        "dag" => config::render_default::<dag_study::DagStudyConfig>(),
        "global" => config::render_default::<global::GlobalConfig>(),
        "tradeoff" => config::render_default::<tradeoff::TradeoffConfig>(),
        "bbc" => config::render_default::<bbc::BbcConfig>(),
        "theorems" => config::render_default::<theorems::TheoremConfig>(),
        other => unreachable!("registry entry {other} has no config"),
    };
    Ok(text)
}
