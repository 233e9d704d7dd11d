//! Scene description files: a sensor size plus `[shape]`, `[motion]` and
//! `[timing]` sections.
//!
//! ```toml
//! rows = 32
//! cols = 32
//!
//! [shape]
//! kind = "disk"
//! center-row = 15.5
//! center-col = 15.5
//! scale = 6.0
//! edge-softness = 1.0
//!
//! [motion]
//! kind = "bounce"
//! contact-us = 8700
//! t0-us = 5000
//!
//! [timing]
//! duration-us = 20000
//! ```

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use tactile_core::sim::{MotionKind, MotionProfile, Phantom, SceneSource, Shape};

use crate::support::usage;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Timing {
    /// Scene length; defaults to the motion's natural duration.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_us: Option<u64>,
    #[serde(default)]
    pub noise_amplitude: f64,
    #[serde(default)]
    pub noise_seed: u64,
}

impl Default for Timing {
    fn default() -> Self {
        Self { duration_us: None, noise_amplitude: 0.0, noise_seed: 0 }
    }
}

/// Field names inside `[shape]` and `[motion]` follow the library types, in
/// kebab-case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Scene {
    pub rows: usize,
    pub cols: usize,
    pub shape: ShapeSection,
    pub motion: MotionSection,
    #[serde(default)]
    pub timing: Timing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ShapeSection {
    pub kind: String,
    pub center_row: f64,
    pub center_col: f64,
    #[serde(default)]
    pub scale: f64,
    #[serde(default = "two")]
    pub width: f64,
    #[serde(default)]
    pub rotation_deg: f64,
    #[serde(default = "one")]
    pub peak_pressure: f64,
    #[serde(default)]
    pub edge_softness: f64,
}

fn one() -> f64 {
    1.0
}

fn two() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct MotionSection {
    pub kind: String,
    #[serde(default)]
    pub t0_us: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ramp_us: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contact_us: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speed_px_per_ms: Option<f64>,
}

impl ShapeSection {
    fn phantom(&self) -> Result<Phantom> {
        let shape = match self.kind.as_str() {
            "disk" => Shape::Disk,
            "square" => Shape::Square,
            "cross" => Shape::Cross,
            "line" => Shape::Line,
            "ring" => Shape::Ring,
            "two-disks" => Shape::TwoDisks,
            "three-lines" => Shape::ThreeLines,
            "triangle" => Shape::Triangle,
            other => return Err(usage(format!("unknown shape kind {other:?}"))),
        };
        Ok(Phantom {
            shape,
            center_row: self.center_row,
            center_col: self.center_col,
            scale: self.scale,
            width: self.width,
            rotation_deg: self.rotation_deg,
            peak_pressure: self.peak_pressure,
            edge_softness: self.edge_softness,
        })
    }
}

impl MotionSection {
    fn profile(&self) -> Result<MotionProfile> {
        let need = |v: Option<u64>, key: &str| v.ok_or_else(|| usage(format!("motion {:?} needs {key}", self.kind)));
        let kind = match self.kind.as_str() {
            "static-indent" => MotionKind::StaticIndent { ramp_us: self.ramp_us.unwrap_or(0) },
            "bounce" => MotionKind::Bounce { contact_us: need(self.contact_us, "contact-us")? },
            "ricochet" => MotionKind::Ricochet {
                angle_deg: self.angle_deg.ok_or_else(|| usage("ricochet needs angle-deg"))?,
                speed_px_per_ms: self.speed_px_per_ms.ok_or_else(|| usage("ricochet needs speed-px-per-ms"))?,
                contact_us: need(self.contact_us, "contact-us")?,
            },
            other => return Err(usage(format!("unknown motion kind {other:?}"))),
        };
        Ok(MotionProfile::new(kind, self.t0_us))
    }
}

impl Scene {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading scene {}", path.display()))?;
        toml::from_str(&text).map_err(|e| usage(format!("scene {}: {e}", path.display())))
    }

    pub fn source(&self) -> Result<SceneSource> {
        let mut src = SceneSource::new(self.shape.phantom()?, self.motion.profile()?, self.rows, self.cols)?
            .with_noise(self.timing.noise_amplitude, self.timing.noise_seed);
        if let Some(d) = self.timing.duration_us {
            src = src.with_duration(d);
        }
        Ok(src)
    }
}
