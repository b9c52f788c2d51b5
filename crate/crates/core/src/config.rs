//! TOML pipeline configuration. Unknown keys are errors, every section is
//! optional, and the context (`road` or `rail`) decides which service block
//! may appear.
//!
//! ```toml
//! context = "road"
//! seed = 7
//! rate = 100.0          # resample target; omit to keep the trace's own rate
//!
//! [frame]
//! window = 1.0          # s
//! overlap = 0.333       # fraction of the window
//!
//! [features]
//! set = ["mean", "rms", "peak2peak"]
//!
//! [gravity]
//! tau = 1.0             # low-pass time constant, s
//!
//! [road.anomaly]
//! k = 3.0
//! ```

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::aggregation::MatchPolicy;
use crate::dissemination::SimConfig;
use crate::error::{Error, Result};
use crate::features::{FeatureId, FramePlan};
use crate::rail::RailConfig;
use crate::road::{AnomalyConfig, ManeuverConfig, RoughnessConfig};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Context {
    #[default]
    Road,
    Rail,
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Context::Road => "road",
            Context::Rail => "rail",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FrameConfig {
    /// s
    pub window: f64,
    pub overlap: f64,
}

impl Default for FrameConfig {
    fn default() -> Self {
        FrameConfig { window: 1.0, overlap: 1.0 / 3.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureConfig {
    pub set: Vec<FeatureId>,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig { set: FeatureId::ALL.to_vec() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GravityConfig {
    /// s
    pub tau: f64,
}

impl Default for GravityConfig {
    fn default() -> Self {
        GravityConfig { tau: 1.0 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RoadConfig {
    pub anomaly: AnomalyConfig,
    pub maneuver: ManeuverConfig,
    pub roughness: RoughnessConfig,
}

/// File layout; `road`/`rail` stay optional so misplaced blocks can be named.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawConfig {
    context: Context,
    seed: u64,
    rate: Option<f64>,
    frame: FrameConfig,
    features: FeatureConfig,
    gravity: GravityConfig,
    road: Option<RoadConfig>,
    rail: Option<RailConfig>,
    aggregation: MatchPolicy,
    simulate: SimConfig,
}

/// Fully resolved configuration with every default filled in.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct PipelineConfig {
    pub context: Context,
    pub seed: u64,
    pub rate: Option<f64>,
    pub frame: FrameConfig,
    pub features: FeatureConfig,
    pub gravity: GravityConfig,
    pub road: RoadConfig,
    pub rail: RailConfig,
    pub aggregation: MatchPolicy,
    pub simulate: SimConfig,
}

impl PipelineConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.message().trim().to_string()))?;
        match raw.context {
            Context::Rail if raw.road.is_some() => {
                return Err(Error::Config("key `road` is not allowed with context = \"rail\"".into()));
            }
            Context::Road if raw.rail.is_some() => {
                return Err(Error::Config("key `rail` is not allowed with context = \"road\"".into()));
            }
            _ => {}
        }
        let cfg = PipelineConfig {
            context: raw.context,
            seed: raw.seed,
            rate: raw.rate,
            frame: raw.frame,
            features: raw.features,
            gravity: raw.gravity,
            road: raw.road.unwrap_or_default(),
            rail: raw.rail.unwrap_or_default(),
            aggregation: raw.aggregation,
            simulate: raw.simulate,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(r) = self.rate {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::Config(format!("rate must be positive, got {r}")));
            }
        }
        if !(self.gravity.tau.is_finite() && self.gravity.tau > 0.0) {
            return Err(Error::Config("gravity.tau must be positive".into()));
        }
        if self.features.set.is_empty() {
            return Err(Error::Config("features.set is empty".into()));
        }
        FramePlan::new(self.frame.window, self.frame.overlap, 100.0)
            .map_err(|e| Error::Config(format!("frame: {e}")))?;
        self.aggregation.validate()?;
        self.simulate.validate()?;
        match self.context {
            Context::Road => {
                self.road.roughness.validate()?;
                let a = &self.road.anomaly;
                if !(a.k.is_finite() && a.k > 0.0) {
                    return Err(Error::Config("road.anomaly.k must be positive".into()));
                }
            }
            Context::Rail => self.rail.validate()?,
        }
        Ok(())
    }

    pub fn frame_plan(&self, rate: f64) -> Result<FramePlan> {
        FramePlan::new(self.frame.window, self.frame.overlap, rate)
    }

    /// Canonical JSON of the resolved configuration.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// SHA-256 of [`canonical_json`](Self::canonical_json), hex.
    pub fn hash(&self) -> String {
        Sha256::digest(self.canonical_json().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}
