//! `metrics`: per-frame analytics of a frame stream.

use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use serde::{Deserialize, Serialize};
use tactile_core::analytics::{
    center_of_pressure, contact_frame_count, force_smoothness, outline, ricochet_angle, support_accuracy, support_iou,
    DEFAULT_THRESHOLD_FRACTION,
};
use tactile_core::io::read_frame_stream;
use tactile_core::sampling::DEFAULT_NS_THR_FRACTION;
use tactile_core::{FrameSource, Hold, ReplaySource};

use crate::support::{csv_writer, load_config, num, overlay, prepare_out, usage};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default, deny_unknown_fields)]
pub struct MetricsConfig {
    pub input: PathBuf,
    /// Reference stream for support scores, matched to each frame's timestamp
    /// with zero-order hold.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<PathBuf>,
    /// A pixel above this pressure counts as active.
    pub contact_thr: f64,
    /// Support threshold as a fraction of each reference frame's peak.
    pub threshold_fraction: f64,
    pub out: PathBuf,
}

impl Default for MetricsConfig {
    fn default() -> Self {
        Self {
            input: PathBuf::new(),
            reference: None,
            contact_thr: DEFAULT_NS_THR_FRACTION,
            threshold_fraction: DEFAULT_THRESHOLD_FRACTION,
            out: PathBuf::new(),
        }
    }
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// `.tfr` frame stream.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub reference: Option<PathBuf>,
    #[arg(long)]
    pub contact_thr: Option<f64>,
    #[arg(long)]
    pub threshold_fraction: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn metrics(args: &MetricsArgs) -> Result<()> {
    let mut cfg: MetricsConfig = load_config(args.config.as_deref())?;
    overlay!(cfg, args, input, contact_thr, threshold_fraction, out);
    if args.reference.is_some() {
        cfg.reference = args.reference.clone();
    }
    if cfg.input.as_os_str().is_empty() {
        return Err(usage("metrics needs a frame stream (--input)"));
    }
    prepare_out(&cfg.out, &cfg)?;
    let frames = read_frame_stream(&cfg.input)?;
    let reference = match &cfg.reference {
        Some(p) => Some(ReplaySource::new(read_frame_stream(p)?, Hold::ZeroOrder)?),
        None => None,
    };

    let mut out = csv_writer(&cfg.out.join("metrics.csv"))?;
    let mut header = vec!["frame", "t_us", "total_force", "cop_row", "cop_col", "active_pixels", "outline_pixels"];
    if reference.is_some() {
        header.extend(["support_accuracy", "support_iou"]);
    }
    out.write_record(&header)?;
    let mut cops = Vec::new();
    for (i, f) in frames.iter().enumerate() {
        let active = f.values().iter().filter(|&&v| v > cfg.contact_thr).count();
        let (r, c) = match center_of_pressure(f) {
            Ok(cop) => {
                if active > 0 {
                    cops.push(cop);
                }
                (num(cop.row), num(cop.col))
            }
            Err(_) => (String::new(), String::new()),
        };
        let mut row = vec![
            i.to_string(),
            f.timestamp_us.to_string(),
            num(f.total()),
            r,
            c,
            active.to_string(),
            outline(f, cfg.contact_thr).len().to_string(),
        ];
        if let Some(src) = &reference {
            let t = &src.snapshot(f.timestamp_us);
            if !f.same_shape(t) {
                return Err(usage("reference stream has a different sensor size"));
            }
            let thr = cfg.threshold_fraction * t.max();
            row.push(num(support_accuracy(f, t, thr)?));
            row.push(num(support_iou(f, t, thr)?));
        }
        out.write_record(&row)?;
    }
    out.flush()?;

    let mut summary = csv_writer(&cfg.out.join("summary.csv"))?;
    summary.write_record(["frames", "contact_frames", "force_smoothness", "ricochet_angle_deg"])?;
    summary.write_record([
        frames.len().to_string(),
        contact_frame_count(&frames, cfg.contact_thr).to_string(),
        force_smoothness(&frames).map(num).unwrap_or_default(),
        ricochet_angle(&cops).map(num).unwrap_or_default(),
    ])?;
    summary.flush()?;
    println!("{} frames, {} in contact", frames.len(), contact_frame_count(&frames, cfg.contact_thr));
    Ok(())
}
