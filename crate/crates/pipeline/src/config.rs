use std::path::Path;

use groundwork_core::filter::FilterConfig;
use groundwork_core::metrics::BeatConfig;
use groundwork_core::refine::{BezierConfig, OutlierConfig};
use groundwork_core::selector::SelectorConfig;
use groundwork_core::tracker::TrackerConfig;
use serde::{Deserialize, Serialize};

use crate::error::{PipelineError, Result};

/// Every tunable of the pipeline. Each table and field may be omitted.
///
/// ```toml
/// [filter]
/// min_box_score = 0.6
///
/// [bezier]
/// window = 21
/// stride = 20
/// ```
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub filter: FilterConfig,
    pub tracker: TrackerConfig,
    pub selector: SelectorConfig,
    pub outlier: OutlierConfig,
    pub bezier: BezierConfig,
    pub beats: BeatConfig,
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> std::result::Result<Self, String> {
        let cfg: Self = toml::from_str(text).map_err(|e| e.to_string())?;
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
        Self::from_toml(&text).map_err(|m| PipelineError::invalid(path, m))
    }

    pub fn validate(&self) -> groundwork_core::Result<()> {
        self.filter.validate()?;
        self.tracker.validate()?;
        self.selector.validate()?;
        self.outlier.validate()?;
        self.bezier.validate()?;
        self.beats.validate()
    }
}
