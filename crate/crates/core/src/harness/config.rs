//! Declarative run configuration (TOML).

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::agent_gateway::{EndpointConfig, SyntheticAgentSpec};
use crate::scoring::DEFAULT_CLIP_CENTS;
use crate::task_battery::BatteryConfig;

use super::HarnessError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSettings {
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    #[serde(default = "default_threshold")]
    pub failure_threshold: f64,
}

fn default_parallelism() -> usize {
    1
}
fn default_threshold() -> f64 {
    0.5
}

impl Default for RunSettings {
    fn default() -> Self {
        Self { parallelism: 1, failure_threshold: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoringSettings {
    /// Price clip in currency units.
    #[serde(default = "default_clip")]
    pub price_clip: f64,
}

fn default_clip() -> f64 {
    DEFAULT_CLIP_CENTS as f64 / 100.0
}

impl Default for ScoringSettings {
    fn default() -> Self {
        Self { price_clip: default_clip() }
    }
}

impl ScoringSettings {
    pub fn clip_cents(&self) -> u64 {
        (self.price_clip * 100.0).round() as u64
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentSettings {
    #[serde(default)]
    pub synthetic: SyntheticAgentSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<EndpointConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarnessConfig {
    pub battery: BatteryConfig,
    #[serde(default)]
    pub agent: AgentSettings,
    #[serde(default)]
    pub run: RunSettings,
    #[serde(default)]
    pub scoring: ScoringSettings,
}

impl HarnessConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            battery: BatteryConfig::new(seed),
            agent: AgentSettings::default(),
            run: RunSettings::default(),
            scoring: ScoringSettings::default(),
        }
    }

    /// Parses TOML. `lookup` resolves `${VAR}` references, which are
    /// allowed only in `agent.endpoint.api_key`.
    pub fn parse(text: &str, lookup: impl Fn(&str) -> Option<String>) -> Result<Self, HarnessError> {
        let mut cfg: HarnessConfig =
            toml::from_str(text).map_err(|e| HarnessError::Validation(format!("config: {e}")))?;
        if let Some(ep) = cfg.agent.endpoint.as_mut() {
            if let Some(key) = ep.api_key.take() {
                let var = key
                    .strip_prefix("${")
                    .and_then(|k| k.strip_suffix('}'))
                    .filter(|k| !k.is_empty() && k.chars().all(|c| c.is_ascii_alphanumeric() || c == '_'))
                    .ok_or_else(|| {
                        HarnessError::Validation(
                            "agent.endpoint.api_key: must be an environment reference like ${NAME}".into(),
                        )
                    })?;
                let value = lookup(var).ok_or_else(|| {
                    HarnessError::Validation(format!("agent.endpoint.api_key: environment variable {var} is not set"))
                })?;
                ep.api_key = Some(value);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Validation(format!("config {}: {e}", path.display())))?;
        Self::parse(&text, |v| std::env::var(v).ok())
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.run.parallelism == 0 {
            return Err(HarnessError::Validation("run.parallelism: must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.run.failure_threshold) {
            return Err(HarnessError::Validation("run.failure_threshold: must lie in [0, 1]".into()));
        }
        if !(self.scoring.price_clip > 0.0) {
            return Err(HarnessError::Validation("scoring.price_clip: must be positive".into()));
        }
        self.agent
            .synthetic
            .prospect
            .validate()
            .map_err(|e| HarnessError::Validation(format!("agent.synthetic.prospect: {e}")))?;
        if self.battery.repeats_per_cell == 0 {
            return Err(HarnessError::Validation("battery.repeats_per_cell: must be at least 1".into()));
        }
        Ok(())
    }

    /// Digest over every setting that affects outputs. Secrets are not
    /// serialized and so never enter it.
    pub fn digest(&self, asset_digest: &str) -> String {
        let mut h = Sha256::new();
        h.update(serde_json::to_vec(self).expect("config serializes"));
        h.update(asset_digest.as_bytes());
        h.update(env!("CARGO_PKG_VERSION").as_bytes());
        hex::encode(h.finalize())
    }
}
