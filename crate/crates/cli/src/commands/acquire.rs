//! `simulate` and `sample`.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use tactile_core::io::{read_frame_stream, write_frame_stream, write_measurement_stream, Dtype};
use tactile_core::sampling::{frame_rate, MeasurementClock, Sampler, SamplingConfig, DEFAULT_SAMPLE_RATE_HZ};
use tactile_core::source::{FrameSource, Hold, ReplaySource};
use tactile_core::Scheme;

use crate::scene::Scene;
use crate::support::{csv_writer, load_config, overlay, prepare_out, usage};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SampleType {
    U16,
    F32,
}

impl From<SampleType> for Dtype {
    fn from(t: SampleType) -> Self {
        match t {
            SampleType::U16 => Dtype::U16,
            SampleType::F32 => Dtype::F32,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default, deny_unknown_fields)]
pub struct SimulateConfig {
    pub scene: PathBuf,
    /// Interval between rendered frames.
    pub frame_us: u64,
    pub dtype: SampleType,
    pub out: PathBuf,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self { scene: PathBuf::new(), frame_us: 1000, dtype: SampleType::F32, out: PathBuf::new() }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub scene: Option<PathBuf>,
    #[arg(long)]
    pub frame_us: Option<u64>,
    #[arg(long)]
    pub dtype: Option<SampleType>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn load_scene(path: &Path, out: &Path) -> Result<Scene> {
    let scene = Scene::load(path)?;
    fs::write(out.join("scene.toml"), toml::to_string(&scene).context("serializing scene")?)
        .context("writing scene echo")?;
    Ok(scene)
}

pub fn simulate(args: &SimulateArgs) -> Result<()> {
    let mut cfg: SimulateConfig = load_config(args.config.as_deref())?;
    overlay!(cfg, args, scene, frame_us, dtype, out);
    if cfg.scene.as_os_str().is_empty() {
        return Err(usage("simulate needs a scene file (--scene)"));
    }
    prepare_out(&cfg.out, &cfg)?;
    let scene = load_scene(&cfg.scene, &cfg.out)?;
    let frames = scene.source()?.render_stream(cfg.frame_us)?;
    write_frame_stream(cfg.out.join("frames.tfr"), &frames, cfg.dtype.into())?;
    println!("{} frames of {}x{}", frames.len(), scene.rows, scene.cols);
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default, deny_unknown_fields)]
pub struct SampleConfig {
    /// Scene file to sample; exclusive with `input`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scene: Option<PathBuf>,
    /// Recorded `.tfr` stream replayed with zero-order hold.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    pub scheme: Scheme,
    pub measurements: usize,
    pub seed: u64,
    pub ns_thr: f64,
    pub sample_rate_hz: f64,
    /// Stop after this time; defaults to the source duration.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duration_us: Option<u64>,
    pub out: PathBuf,
}

impl Default for SampleConfig {
    fn default() -> Self {
        Self {
            scene: None,
            input: None,
            scheme: Scheme::Binary,
            measurements: 64,
            seed: 0,
            ns_thr: 0.05,
            sample_rate_hz: DEFAULT_SAMPLE_RATE_HZ,
            duration_us: None,
            out: PathBuf::new(),
        }
    }
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub scene: Option<PathBuf>,
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// uniform, random, binary or full-raster.
    #[arg(long)]
    pub scheme: Option<Scheme>,
    #[arg(long)]
    pub measurements: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub ns_thr: Option<f64>,
    #[arg(long)]
    pub sample_rate_hz: Option<f64>,
    #[arg(long)]
    pub duration_us: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn sample(args: &SampleArgs) -> Result<()> {
    let mut cfg: SampleConfig = load_config(args.config.as_deref())?;
    overlay!(cfg, args, scheme, measurements, seed, ns_thr, sample_rate_hz, out);
    if args.scene.is_some() {
        cfg.scene = args.scene.clone();
    }
    if args.input.is_some() {
        cfg.input = args.input.clone();
    }
    if args.duration_us.is_some() {
        cfg.duration_us = args.duration_us;
    }
    if !(cfg.sample_rate_hz > 0.0 && cfg.sample_rate_hz.is_finite()) {
        return Err(usage(format!("sample rate {} Hz", cfg.sample_rate_hz)));
    }
    prepare_out(&cfg.out, &cfg)?;
    let source: Box<dyn FrameSource> = match (&cfg.scene, &cfg.input) {
        (Some(scene), None) => Box::new(load_scene(scene, &cfg.out)?.source()?),
        (None, Some(input)) => Box::new(ReplaySource::new(read_frame_stream(input)?, Hold::ZeroOrder)?),
        _ => return Err(usage("sample needs exactly one of --scene or --input")),
    };
    let sampling = SamplingConfig::new(cfg.scheme, cfg.measurements).with_ns_thr(cfg.ns_thr).with_seed(cfg.seed);
    let sampler = Sampler::new(sampling, source.rows(), source.cols())?;
    let end = cfg.duration_us.unwrap_or(source.duration_us());
    let sets = sampler.sample_stream(source.as_ref(), &mut MeasurementClock::new(cfg.sample_rate_hz), end)?;
    write_measurement_stream(cfg.out.join("measurements.tms"), &sets)?;

    let mut log = csv_writer(&cfg.out.join("frames.csv"))?;
    log.write_record(["frame_index", "measurements", "start_us", "end_us", "exhausted"])?;
    for s in &sets {
        let start = s.measurements().first().map_or(0, |m| m.t_us);
        log.write_record([
            s.frame_index.to_string(),
            s.len().to_string(),
            start.to_string(),
            s.end_us().unwrap_or(0).to_string(),
            s.exhausted.to_string(),
        ])?;
    }
    log.flush()?;
    println!(
        "{} frames, {} scheme, M = {}, frame rate {} FPS",
        sets.len(),
        cfg.scheme.name(),
        cfg.measurements,
        frame_rate(cfg.measurements, cfg.sample_rate_hz)
    );
    Ok(())
}
