//! Pipeline configuration with canonical TOML serialization.

use crate::codec::CascadeConfig;
use crate::error::{Error, Result};
use crate::eval::ApMode;
use crate::nms::NmsMode;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Every knob of the tile/detect/merge/evaluate pipeline in one place.
///
/// Serialization is canonical: serializing a parsed config reproduces
/// the canonical file byte for byte, so configs can be diffed and
/// tracked alongside experiment outputs. The `seed` field is carried
/// for consumers that schedule randomized augmentation; nothing in the
/// toolkit itself draws random numbers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    /// Patch side in pixels.
    pub patch: u32,
    /// Overlap between adjacent patches in pixels.
    pub gap: u32,
    /// Per-stage assignment thresholds, first stage to last.
    pub cascade: CascadeConfig,
    /// Detection confidence floor.
    pub conf_thr: f64,
    /// NMS IoU threshold.
    pub nms_thr: f64,
    /// NMS suppression mode.
    pub nms_mode: NmsMode,
    /// AP interpolation convention for evaluation.
    pub eval_mode: ApMode,
    /// Rotated IoU threshold for evaluation matching.
    pub eval_iou_thr: f64,
    /// Multi-scale factors.
    pub scales: Vec<f64>,
    /// Minimum visible area fraction for clipped annotations.
    pub keep_visibility: f64,
    /// Reserved for consumers that randomize augmentation schedules.
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            patch: 800,
            gap: 150,
            cascade: CascadeConfig::default(),
            conf_thr: 0.05,
            nms_thr: 0.5,
            nms_mode: NmsMode::ClassAware,
            eval_mode: ApMode::AllPoint,
            eval_iou_thr: 0.5,
            scales: vec![1.0],
            keep_visibility: 0.7,
            seed: 0,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.patch <= self.gap {
            return Err(Error::Config(format!(
                "patch ({}) must exceed gap ({})",
                self.patch, self.gap
            )));
        }
        self.cascade.validate().map_err(|e| Error::Config(e.to_string()))?;
        if !(0.0..=1.0).contains(&self.conf_thr) {
            return Err(Error::Config(format!("conf_thr {} outside [0, 1]", self.conf_thr)));
        }
        if !(0.0..=1.0).contains(&self.nms_thr) {
            return Err(Error::Config(format!("nms_thr {} outside [0, 1]", self.nms_thr)));
        }
        if !(self.eval_iou_thr > 0.0 && self.eval_iou_thr <= 1.0) {
            return Err(Error::Config(format!(
                "eval_iou_thr {} outside (0, 1]",
                self.eval_iou_thr
            )));
        }
        if self.scales.is_empty() || self.scales.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(Error::Config("scales must be non-empty and positive".into()));
        }
        if !(self.keep_visibility > 0.0 && self.keep_visibility <= 1.0) {
            return Err(Error::Config(format!(
                "keep_visibility {} outside (0, 1]",
                self.keep_visibility
            )));
        }
        Ok(())
    }

    /// Canonical TOML form.
    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: PipelineConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Self::from_toml(&text)
    }
}
