//! Run configuration: a JSON manifest plus command-line overrides.
//!
//! The manifest is strict (unknown fields are rejected) so an experiment
//! file always means what it says. Every command validates the pieces it
//! needs before any computation starts.

use robin_core::geom::DomainSpec;
use robin_core::mfs::MfsConfig;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    /// Manifest schema version; must be 1 when present.
    pub schema_version: Option<u32>,
    /// Seed for every randomized sampler (reproducible outputs).
    pub seed: Option<u64>,
    pub domain: Option<DomainSpec>,
    pub hole: Option<HoleConfig>,
    /// Full solver-resolution override; defaults are chosen per dimension.
    pub resolution: Option<MfsConfig>,
    pub grid: Option<GridConfig>,
    /// Ellipsoid study inputs.
    pub alpha: Option<Vec<f64>>,
    pub deltas: Option<Vec<f64>>,
    /// Convergence study inputs.
    pub eps_sweep: Option<Vec<f64>>,
    pub probe: Option<Vec<f64>>,
    /// Identity table inputs.
    pub samples_per_identity: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HoleConfig {
    pub center: Vec<f64>,
    pub radius: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub nx: usize,
    pub ny: usize,
}

impl FileConfig {
    pub fn load(path: &std::path::Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let cfg: FileConfig =
            serde_json::from_str(&text).map_err(|e| format!("config parse error: {e}"))?;
        if let Some(v) = cfg.schema_version {
            if v != SCHEMA_VERSION {
                return Err(format!(
                    "unsupported schema_version {v} (this build reads {SCHEMA_VERSION})"
                ));
            }
        }
        Ok(cfg)
    }
}

/// Serialize a float with 17 significant digits (round-trip exact).
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}
