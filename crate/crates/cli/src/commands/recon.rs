//! `reconstruct`.

use std::path::PathBuf;
use std::time::Instant;

use anyhow::Result;
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use tactile_core::analytics::{support_accuracy, support_iou, DEFAULT_THRESHOLD_FRACTION};
use tactile_core::dictionary::overcomplete_dct;
use tactile_core::io::{read_dictionary_file, read_frame_stream, read_measurement_stream, write_frame_stream, Dtype};
use tactile_core::reconstruction::{interpolate_baseline, PatchReconstructor, ReconstructionParams};
use tactile_core::{FrameSource, Hold, ReplaySource, TactileFrame};

use crate::support::{csv_writer, load_config, num, overlay, prepare_out, usage};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Patchwise sparse coding against a dictionary.
    Dictionary,
    /// Piecewise-linear interpolation of the measured pixels.
    Interp,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default, deny_unknown_fields)]
pub struct ReconstructConfig {
    pub measurements: PathBuf,
    /// `.tdl` dictionary; an 8x8 DCT with 256 atoms when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dictionary: Option<PathBuf>,
    pub method: Method,
    /// Ground-truth `.tfr` stream for support scores.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truth: Option<PathBuf>,
    pub overlap: usize,
    pub sparsity_fraction: f64,
    pub min_patch_measurements: usize,
    /// Support threshold as a fraction of each truth frame's peak.
    pub threshold_fraction: f64,
    /// Adds a wall-time column; output is then no longer reproducible.
    pub timing: bool,
    pub out: PathBuf,
}

impl Default for ReconstructConfig {
    fn default() -> Self {
        let p = ReconstructionParams::default();
        Self {
            measurements: PathBuf::new(),
            dictionary: None,
            method: Method::Dictionary,
            truth: None,
            overlap: p.overlap,
            sparsity_fraction: p.sparsity_fraction,
            min_patch_measurements: p.min_patch_measurements,
            threshold_fraction: DEFAULT_THRESHOLD_FRACTION,
            timing: false,
            out: PathBuf::new(),
        }
    }
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// `.tms` measurement stream.
    #[arg(long)]
    pub measurements: Option<PathBuf>,
    #[arg(long)]
    pub dictionary: Option<PathBuf>,
    #[arg(long)]
    pub method: Option<Method>,
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long)]
    pub overlap: Option<usize>,
    #[arg(long)]
    pub sparsity_fraction: Option<f64>,
    #[arg(long)]
    pub min_patch_measurements: Option<usize>,
    #[arg(long)]
    pub threshold_fraction: Option<f64>,
    #[arg(long)]
    pub timing: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn reconstruct(args: &ReconstructArgs) -> Result<()> {
    let mut cfg: ReconstructConfig = load_config(args.config.as_deref())?;
    overlay!(cfg, args, measurements, method, overlap, sparsity_fraction, min_patch_measurements, threshold_fraction, out);
    if args.dictionary.is_some() {
        cfg.dictionary = args.dictionary.clone();
    }
    if args.truth.is_some() {
        cfg.truth = args.truth.clone();
    }
    cfg.timing |= args.timing;
    if cfg.measurements.as_os_str().is_empty() {
        return Err(usage("reconstruct needs a measurement stream (--measurements)"));
    }
    prepare_out(&cfg.out, &cfg)?;

    let sets = read_measurement_stream(&cfg.measurements)?;
    let truth = match &cfg.truth {
        Some(p) => Some(ReplaySource::new(read_frame_stream(p)?, Hold::ZeroOrder)?),
        None => None,
    };
    let dict = match &cfg.dictionary {
        Some(p) => read_dictionary_file(p)?,
        None => overcomplete_dct(8, 8, 256)?,
    };
    let params = ReconstructionParams {
        patch_rows: dict.patch_rows(),
        patch_cols: dict.patch_cols(),
        overlap: cfg.overlap,
        sparsity_fraction: cfg.sparsity_fraction,
        min_patch_measurements: cfg.min_patch_measurements,
        ..ReconstructionParams::default()
    };

    let mut stats = csv_writer(&cfg.out.join("stats.csv"))?;
    let mut header = vec!["frame_index", "measurements", "support_accuracy", "support_iou"];
    if cfg.timing {
        header.push("wall_us");
    }
    stats.write_record(&header)?;

    let mut frames = Vec::with_capacity(sets.len());
    let mut reconstructor: Option<((usize, usize), PatchReconstructor)> = None;
    for set in &sets {
        if set.is_empty() {
            return Err(usage(format!("frame {} has no measurements", set.frame_index)));
        }
        let started = Instant::now();
        let frame = match cfg.method {
            Method::Interp => interpolate_baseline(set, set.rows, set.cols)?,
            Method::Dictionary => {
                let shape = (set.rows, set.cols);
                if reconstructor.as_ref().is_none_or(|(s, _)| *s != shape) {
                    reconstructor = Some((shape, PatchReconstructor::new(&dict, params, set.rows, set.cols)?));
                }
                reconstructor.as_ref().expect("reconstructor built above").1.reconstruct(set)?
            }
        };
        let wall = started.elapsed().as_micros();

        let (acc, iou) = match &truth {
            Some(src) => {
                let t = src.snapshot(frame.timestamp_us);
                score(&frame, &t, cfg.threshold_fraction)?
            }
            None => (String::new(), String::new()),
        };
        let mut row = vec![set.frame_index.to_string(), set.len().to_string(), acc, iou];
        if cfg.timing {
            row.push(wall.to_string());
        }
        stats.write_record(&row)?;
        frames.push(frame);
    }
    stats.flush()?;
    write_frame_stream(cfg.out.join("reconstruction.tfr"), &frames, Dtype::F32)?;
    println!("{} frames reconstructed", frames.len());
    Ok(())
}

fn score(recon: &TactileFrame, truth: &TactileFrame, fraction: f64) -> Result<(String, String)> {
    if recon.rows() != truth.rows() || recon.cols() != truth.cols() {
        return Err(usage("truth stream has a different sensor size"));
    }
    let thr = fraction * truth.max();
    Ok((num(support_accuracy(recon, truth, thr)?), num(support_iou(recon, truth, thr)?)))
}
