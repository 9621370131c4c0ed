//! Simulation configuration, validation and TOML layering.
//!
//! Precedence: command-line flags override config-file values, which
//! override built-in defaults. The homophily exponent is the one knob
//! with no default: its value changes results qualitatively, so it must
//! be chosen explicitly per experiment.

use crate::feed::Platform;
use crate::generation::{MockParams, RemoteOptions};
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

pub const DEFAULT_N_AGENTS: usize = 500;
pub const DEFAULT_OUT_DEGREE: usize = 30;
pub const DEFAULT_TIMELINE_K: usize = 10;
pub const DEFAULT_POSTING_FRACTION: f64 = 0.4;
pub const DEFAULT_STOP_FRACTION: f64 = 0.30;
pub const DEFAULT_PARTY_THRESHOLD: f64 = 0.1;

/// What "an agent is done" means for the stop criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum StopRule {
    /// Agent has liked at least once AND commented at least once.
    #[default]
    Both,
    /// Agent has liked at least once OR commented at least once.
    Either,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub seed: u64,
    pub n_agents: usize,
    pub out_degree: usize,
    /// Homophily exponent for graph generation. No default.
    pub homophily: f64,
    pub platform: Platform,
    /// Posts shown per timeline view.
    pub timeline_k: usize,
    /// Fraction of agents that write a first post in phase one.
    pub posting_fraction: f64,
    /// Fraction of agents that must satisfy the stop rule to end the run.
    pub stop_fraction: f64,
    pub stop_rule: StopRule,
    /// |partisanship| above which an agent gets a major-party label.
    pub party_threshold: f64,
    /// Phase-two turn budget; None means 200 turns per agent.
    pub max_turns: Option<u64>,
    pub mock: MockParams,
}

impl SimulationConfig {
    /// Defaults for everything except the two required choices.
    pub fn new(seed: u64, homophily: f64) -> Self {
        SimulationConfig {
            seed,
            n_agents: DEFAULT_N_AGENTS,
            out_degree: DEFAULT_OUT_DEGREE,
            homophily,
            platform: Platform::Follow,
            timeline_k: DEFAULT_TIMELINE_K,
            posting_fraction: DEFAULT_POSTING_FRACTION,
            stop_fraction: DEFAULT_STOP_FRACTION,
            stop_rule: StopRule::Both,
            party_threshold: DEFAULT_PARTY_THRESHOLD,
            max_turns: None,
            mock: MockParams::default(),
        }
    }

    pub fn effective_max_turns(&self) -> u64 {
        self.max_turns.unwrap_or(200 * self.n_agents as u64)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let err = |field: &'static str, reason: String| Err(ConfigError::Invalid { field, reason });
        if self.n_agents < 2 {
            return err("n_agents", format!("need at least 2 agents, got {}", self.n_agents));
        }
        if self.out_degree == 0 || self.out_degree >= self.n_agents {
            return err(
                "out_degree",
                format!("must be in 1..={} for {} agents, got {}", self.n_agents - 1, self.n_agents, self.out_degree),
            );
        }
        if !self.homophily.is_finite() || self.homophily < 0.0 {
            return err("homophily", format!("must be finite and >= 0, got {}", self.homophily));
        }
        if self.timeline_k == 0 {
            return err("timeline_k", "must be at least 1".into());
        }
        if !(self.posting_fraction > 0.0 && self.posting_fraction <= 1.0) {
            return err(
                "posting_fraction",
                format!("must be in (0, 1], got {}", self.posting_fraction),
            );
        }
        if !(0.0..=1.0).contains(&self.stop_fraction) {
            return err("stop_fraction", format!("must be in [0, 1], got {}", self.stop_fraction));
        }
        if !(self.party_threshold > 0.0 && self.party_threshold <= 1.0) {
            return err(
                "party_threshold",
                format!("must be in (0, 1], got {}", self.party_threshold),
            );
        }
        if let Err(reason) = self.mock.validate() {
            return err("mock", reason);
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config field {field}: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("config file: {0}")]
    Io(#[from] std::io::Error),
    #[error("config file is not valid TOML: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("config is missing required value {0:?} (set it in the file or pass the flag)")]
    MissingRequired(&'static str),
}

/// Partially specified config, as read from a TOML file or assembled
/// from command-line flags. Merge layers with [`PartialConfig::or`]
/// (left wins), then finish with [`PartialConfig::build`].
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub seed: Option<u64>,
    pub n_agents: Option<usize>,
    pub out_degree: Option<usize>,
    pub homophily: Option<f64>,
    pub platform: Option<Platform>,
    pub timeline_k: Option<usize>,
    pub posting_fraction: Option<f64>,
    pub stop_fraction: Option<f64>,
    pub stop_rule: Option<StopRule>,
    pub party_threshold: Option<f64>,
    pub max_turns: Option<u64>,
    pub mock: Option<PartialMockParams>,
    /// Remote backend transport settings (timeouts, retries, endpoint).
    /// Not part of [`SimulationConfig`]: transport does not change what
    /// a run means, so it stays out of log headers.
    pub remote: Option<RemoteOptions>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialMockParams {
    pub p_agree: Option<f64>,
    pub p_cross: Option<f64>,
    pub q_conflict: Option<f64>,
}

impl PartialMockParams {
    fn or(self, fallback: PartialMockParams) -> PartialMockParams {
        PartialMockParams {
            p_agree: self.p_agree.or(fallback.p_agree),
            p_cross: self.p_cross.or(fallback.p_cross),
            q_conflict: self.q_conflict.or(fallback.q_conflict),
        }
    }
}

impl PartialConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    pub fn from_toml_file(path: &Path) -> Result<Self, ConfigError> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    /// Layer two partial configs; `self` wins where both are set.
    pub fn or(self, fallback: PartialConfig) -> PartialConfig {
        PartialConfig {
            seed: self.seed.or(fallback.seed),
            n_agents: self.n_agents.or(fallback.n_agents),
            out_degree: self.out_degree.or(fallback.out_degree),
            homophily: self.homophily.or(fallback.homophily),
            platform: self.platform.or(fallback.platform),
            timeline_k: self.timeline_k.or(fallback.timeline_k),
            posting_fraction: self.posting_fraction.or(fallback.posting_fraction),
            stop_fraction: self.stop_fraction.or(fallback.stop_fraction),
            stop_rule: self.stop_rule.or(fallback.stop_rule),
            party_threshold: self.party_threshold.or(fallback.party_threshold),
            max_turns: self.max_turns.or(fallback.max_turns),
            mock: match (self.mock, fallback.mock) {
                (Some(a), Some(b)) => Some(a.or(b)),
                (a, b) => a.or(b),
            },
            remote: self.remote.or(fallback.remote),
        }
    }

    /// Fill remaining gaps with defaults and validate. `seed`,
    /// `homophily` and `platform` have no defaults.
    pub fn build(self) -> Result<SimulationConfig, ConfigError> {
        let seed = self.seed.ok_or(ConfigError::MissingRequired("seed"))?;
        let homophily = self.homophily.ok_or(ConfigError::MissingRequired("homophily"))?;
        let platform = self.platform.ok_or(ConfigError::MissingRequired("platform"))?;
        let defaults = MockParams::default();
        let mock = match self.mock {
            Some(m) => MockParams {
                p_agree: m.p_agree.unwrap_or(defaults.p_agree),
                p_cross: m.p_cross.unwrap_or(defaults.p_cross),
                q_conflict: m.q_conflict.unwrap_or(defaults.q_conflict),
            },
            None => defaults,
        };
        let config = SimulationConfig {
            seed,
            n_agents: self.n_agents.unwrap_or(DEFAULT_N_AGENTS),
            out_degree: self.out_degree.unwrap_or(DEFAULT_OUT_DEGREE),
            homophily,
            platform,
            timeline_k: self.timeline_k.unwrap_or(DEFAULT_TIMELINE_K),
            posting_fraction: self.posting_fraction.unwrap_or(DEFAULT_POSTING_FRACTION),
            stop_fraction: self.stop_fraction.unwrap_or(DEFAULT_STOP_FRACTION),
            stop_rule: self.stop_rule.unwrap_or_default(),
            party_threshold: self.party_threshold.unwrap_or(DEFAULT_PARTY_THRESHOLD),
            max_turns: self.max_turns,
            mock,
        };
        config.validate()?;
        Ok(config)
    }
}
