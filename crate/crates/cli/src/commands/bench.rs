//! `bench`: classification accuracy, frame rate and reconstruction support
//! versus measurement budget over the standard phantom set.

use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use tactile_core::analytics::{support_accuracy, support_iou, DEFAULT_THRESHOLD_FRACTION};
use tactile_core::classify::{build_src_library, src_classify, DEFAULT_FRAMES_PER_CLASS};
use tactile_core::dictionary::overcomplete_dct;
use tactile_core::io::read_dictionary_file;
use tactile_core::reconstruction::{interpolate_baseline, PatchReconstructor, ReconstructionParams};
use tactile_core::sampling::{frame_rate, frame_time_us, MeasurementClock, Sampler, SamplingConfig, DEFAULT_SAMPLE_RATE_HZ};
use tactile_core::sim::{render_phantom, standard_phantoms, Phantom};
use tactile_core::{Exec, Scheme, TactileFrame};

use crate::support::{csv_writer, load_config, num, overlay, prepare_out};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default, deny_unknown_fields)]
pub struct BenchConfig {
    pub measurements: Vec<usize>,
    pub schemes: Vec<Scheme>,
    pub rows: usize,
    pub cols: usize,
    pub trials_per_class: usize,
    pub frames_per_class: usize,
    /// Maximum center offset of each rendered phantom, in pixels.
    pub jitter_px: f64,
    pub seed: u64,
    /// `.tdl` dictionary; an 8x8 DCT with 256 atoms when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dictionary: Option<PathBuf>,
    pub sample_rate_hz: f64,
    pub ns_thr: f64,
    pub contact_thr: f64,
    pub threshold_fraction: f64,
    pub out: PathBuf,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            measurements: vec![32, 64, 128, 256, 512, 1024],
            schemes: vec![Scheme::Uniform, Scheme::Random, Scheme::Binary],
            rows: 32,
            cols: 32,
            trials_per_class: 10,
            frames_per_class: DEFAULT_FRAMES_PER_CLASS,
            jitter_px: 1.0,
            seed: 0,
            dictionary: None,
            sample_rate_hz: DEFAULT_SAMPLE_RATE_HZ,
            ns_thr: 0.05,
            contact_thr: 0.0,
            threshold_fraction: DEFAULT_THRESHOLD_FRACTION,
            out: PathBuf::new(),
        }
    }
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, num_args = 0..)]
    pub measurements: Option<Vec<usize>>,
    #[arg(long, num_args = 0..)]
    pub schemes: Option<Vec<Scheme>>,
    #[arg(long)]
    pub rows: Option<usize>,
    #[arg(long)]
    pub cols: Option<usize>,
    #[arg(long)]
    pub trials_per_class: Option<usize>,
    #[arg(long)]
    pub frames_per_class: Option<usize>,
    #[arg(long)]
    pub jitter_px: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub dictionary: Option<PathBuf>,
    #[arg(long)]
    pub sample_rate_hz: Option<f64>,
    #[arg(long)]
    pub ns_thr: Option<f64>,
    #[arg(long)]
    pub contact_thr: Option<f64>,
    #[arg(long)]
    pub threshold_fraction: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

struct Trial {
    class: usize,
    truth: TactileFrame,
}

struct TrialResult {
    correct: bool,
    no_contact: bool,
    dict_acc: f64,
    dict_iou: f64,
    interp_acc: f64,
    interp_iou: f64,
}

fn jittered(p: &Phantom, px: f64, rng: &mut ChaCha8Rng) -> Phantom {
    if px <= 0.0 {
        return p.clone();
    }
    Phantom {
        center_row: p.center_row + rng.random_range(-px..=px),
        center_col: p.center_col + rng.random_range(-px..=px),
        ..p.clone()
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 { 0.0 } else { s / n as f64 }
}

pub fn bench(args: &BenchArgs) -> Result<()> {
    let mut cfg: BenchConfig = load_config(args.config.as_deref())?;
    overlay!(
        cfg, args, measurements, schemes, rows, cols, trials_per_class, frames_per_class, jitter_px, seed, sample_rate_hz,
        ns_thr, contact_thr, threshold_fraction, out
    );
    if args.dictionary.is_some() {
        cfg.dictionary = args.dictionary.clone();
    }
    prepare_out(&cfg.out, &cfg)?;
    let (rows, cols) = (cfg.rows, cfg.cols);

    let mut accuracy = csv_writer(&cfg.out.join("accuracy_vs_m.csv"))?;
    accuracy.write_record(["scheme", "measurements", "trials", "correct", "no_contact", "accuracy"])?;
    let mut fps = csv_writer(&cfg.out.join("fps_vs_m.csv"))?;
    fps.write_record(["measurements", "frame_rate_fps", "frame_time_us"])?;
    let mut support = csv_writer(&cfg.out.join("support_vs_m.csv"))?;
    support.write_record([
        "scheme",
        "measurements",
        "dictionary_support_accuracy",
        "dictionary_iou",
        "interp_support_accuracy",
        "interp_iou",
    ])?;
    for &m in &cfg.measurements {
        fps.write_record([m.to_string(), num(frame_rate(m, cfg.sample_rate_hz)), num(frame_time_us(m, cfg.sample_rate_hz))])?;
    }

    if !cfg.measurements.is_empty() && !cfg.schemes.is_empty() {
        let classes = standard_phantoms(rows, cols);
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut streams = Vec::with_capacity(classes.len());
        for (name, p) in &classes {
            let frames = (0..cfg.frames_per_class)
                .map(|_| render_phantom(&jittered(p, cfg.jitter_px, &mut rng), rows, cols))
                .collect::<tactile_core::Result<Vec<_>>>()?;
            streams.push((name.to_string(), frames));
        }
        let lib = build_src_library(&streams, cfg.frames_per_class, 0.0)?;
        let mut trials = Vec::new();
        for (class, (_, p)) in classes.iter().enumerate() {
            for _ in 0..cfg.trials_per_class {
                trials.push(Trial { class, truth: render_phantom(&jittered(p, cfg.jitter_px, &mut rng), rows, cols)? });
            }
        }
        let dict = match &cfg.dictionary {
            Some(p) => read_dictionary_file(p)?,
            None => overcomplete_dct(8, 8, 256)?,
        };
        let params = ReconstructionParams {
            patch_rows: dict.patch_rows(),
            patch_cols: dict.patch_cols(),
            exec: Exec::Sequential,
            ..ReconstructionParams::default()
        };
        let recon = PatchReconstructor::new(&dict, params, rows, cols)?;

        for &scheme in &cfg.schemes {
            for &m in &cfg.measurements {
                let sampling = SamplingConfig::new(scheme, m).with_ns_thr(cfg.ns_thr).with_seed(cfg.seed);
                let sampler = Sampler::new(sampling, rows, cols)?;
                let results = Exec::Parallel.map_range(trials.len(), |i| -> tactile_core::Result<TrialResult> {
                    let trial = &trials[i];
                    let mut clock = MeasurementClock::new(cfg.sample_rate_hz);
                    let set = sampler.sample_frame(&trial.truth, i as u64, &mut clock)?;
                    let c = src_classify(&set, &lib, None, cfg.contact_thr)?;
                    let thr = cfg.threshold_fraction * trial.truth.max();
                    let d = recon.reconstruct(&set)?;
                    let l = interpolate_baseline(&set, rows, cols)?;
                    Ok(TrialResult {
                        correct: c.label() == Some(trial.class),
                        no_contact: c.no_contact,
                        dict_acc: support_accuracy(&d, &trial.truth, thr)?,
                        dict_iou: support_iou(&d, &trial.truth, thr)?,
                        interp_acc: support_accuracy(&l, &trial.truth, thr)?,
                        interp_iou: support_iou(&l, &trial.truth, thr)?,
                    })
                });
                let results = results.into_iter().collect::<tactile_core::Result<Vec<_>>>()?;
                let correct = results.iter().filter(|r| r.correct).count();
                let no_contact = results.iter().filter(|r| r.no_contact).count();
                accuracy.write_record([
                    scheme.name().to_string(),
                    m.to_string(),
                    results.len().to_string(),
                    correct.to_string(),
                    no_contact.to_string(),
                    num(if results.is_empty() { 0.0 } else { correct as f64 / results.len() as f64 }),
                ])?;
                support.write_record([
                    scheme.name().to_string(),
                    m.to_string(),
                    num(mean(results.iter().map(|r| r.dict_acc))),
                    num(mean(results.iter().map(|r| r.dict_iou))),
                    num(mean(results.iter().map(|r| r.interp_acc))),
                    num(mean(results.iter().map(|r| r.interp_iou))),
                ])?;
                println!("{} M = {m}: {correct}/{} correct", scheme.name(), results.len());
            }
        }
    }
    accuracy.flush()?;
    fps.flush()?;
    support.flush()?;
    Ok(())
}
