//! `classify`.

use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use serde::{Deserialize, Serialize};
use tactile_core::classify::{
    build_src_library, select_rapid_frame, src_classify, Classification, SrcLibrary, DEFAULT_FRAMES_PER_CLASS,
};
use tactile_core::io::{read_frame_stream, read_library_file, read_measurement_stream, write_library_file};
use tactile_core::sampling::DEFAULT_NS_THR_FRACTION;

use crate::support::{csv_writer, labeled_path, load_config, num, overlay, prepare_out, usage};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default, deny_unknown_fields)]
pub struct ClassifyConfig {
    /// Prebuilt `.tsrc` library; exclusive with `train`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub library: Option<PathBuf>,
    /// Training streams as `label=path.tfr`.
    pub train: Vec<String>,
    pub frames_per_class: usize,
    pub pressure_quantile: f64,
    /// Measurement streams to classify as `label=path.tms`.
    pub inputs: Vec<String>,
    /// OMP sparsity; `ceil(M / 4)` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sparsity: Option<usize>,
    pub contact_thr: f64,
    /// Also classify one frame per input, picked within this window after
    /// first contact.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window_ms: Option<f64>,
    pub out: PathBuf,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self {
            library: None,
            train: Vec::new(),
            frames_per_class: DEFAULT_FRAMES_PER_CLASS,
            pressure_quantile: 0.0,
            inputs: Vec::new(),
            sparsity: None,
            contact_thr: DEFAULT_NS_THR_FRACTION,
            window_ms: None,
            out: PathBuf::new(),
        }
    }
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub library: Option<PathBuf>,
    /// `label=path.tfr`; repeat for several classes.
    #[arg(long, num_args = 1..)]
    pub train: Option<Vec<String>>,
    #[arg(long)]
    pub frames_per_class: Option<usize>,
    #[arg(long)]
    pub pressure_quantile: Option<f64>,
    /// `label=path.tms`; repeat for several trials.
    #[arg(long, num_args = 1..)]
    pub inputs: Option<Vec<String>>,
    #[arg(long)]
    pub sparsity: Option<usize>,
    #[arg(long)]
    pub contact_thr: Option<f64>,
    #[arg(long)]
    pub window_ms: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn load_library(cfg: &ClassifyConfig) -> Result<SrcLibrary> {
    match (&cfg.library, cfg.train.is_empty()) {
        (Some(path), true) => Ok(read_library_file(path)?),
        (None, false) => {
            let mut streams = Vec::new();
            for arg in &cfg.train {
                let (label, path) = labeled_path(arg)?;
                streams.push((label, read_frame_stream(path)?));
            }
            let lib = build_src_library(&streams, cfg.frames_per_class, cfg.pressure_quantile)?;
            write_library_file(cfg.out.join("library.tsrc"), &lib)?;
            Ok(lib)
        }
        _ => Err(usage("classify needs exactly one of --library or --train")),
    }
}

pub fn classify(args: &ClassifyArgs) -> Result<()> {
    let mut cfg: ClassifyConfig = load_config(args.config.as_deref())?;
    overlay!(cfg, args, train, frames_per_class, pressure_quantile, inputs, contact_thr, out);
    if args.library.is_some() {
        cfg.library = args.library.clone();
    }
    if args.sparsity.is_some() {
        cfg.sparsity = args.sparsity;
    }
    if args.window_ms.is_some() {
        cfg.window_ms = args.window_ms;
    }
    if cfg.inputs.is_empty() {
        return Err(usage("classify needs at least one input (--inputs label=path.tms)"));
    }
    prepare_out(&cfg.out, &cfg)?;
    let lib = load_library(&cfg)?;
    let names = &lib.class_names;

    let mut header = vec!["trial".to_string(), "source".into(), "frame_index".into(), "true_label".into()];
    header.extend(["predicted", "no_contact"].map(String::from));
    header.extend(names.iter().map(|n| format!("residual_{n}")));
    let mut predictions = csv_writer(&cfg.out.join("predictions.csv"))?;
    predictions.write_record(&header)?;
    let mut rapid = match cfg.window_ms {
        Some(_) => {
            let mut w = csv_writer(&cfg.out.join("rapid.csv"))?;
            w.write_record([
                "trial",
                "true_label",
                "first_contact_us",
                "frame_index",
                "frames_in_window",
                "predicted",
                "no_contact",
            ])?;
            Some(w)
        }
        None => None,
    };

    let mut truth_labels: Vec<String> = names.clone();
    let mut confusion: Vec<Vec<u64>> = vec![vec![0; names.len() + 1]; names.len()];
    let predicted_name = |c: &Classification| if c.no_contact { String::new() } else { names[c.class].clone() };

    for (trial, arg) in cfg.inputs.iter().enumerate() {
        let (label, path) = labeled_path(arg)?;
        let row_index = match truth_labels.iter().position(|l| *l == label) {
            Some(i) => i,
            None => {
                truth_labels.push(label.clone());
                confusion.push(vec![0; names.len() + 1]);
                truth_labels.len() - 1
            }
        };
        let sets = read_measurement_stream(&path)?;
        let mut results = Vec::with_capacity(sets.len());
        for set in &sets {
            let c = src_classify(set, &lib, cfg.sparsity, cfg.contact_thr)?;
            let mut row = vec![
                trial.to_string(),
                path.display().to_string(),
                set.frame_index.to_string(),
                label.clone(),
                predicted_name(&c),
                c.no_contact.to_string(),
            ];
            row.extend(c.residuals.iter().map(|&r| num(r)));
            predictions.write_record(&row)?;
            confusion[row_index][c.label().unwrap_or(names.len())] += 1;
            results.push(c);
        }
        if let (Some(w), Some(window)) = (rapid.as_mut(), cfg.window_ms) {
            match select_rapid_frame(&sets, window, cfg.contact_thr) {
                Some(sel) => {
                    let c = &results[sel.index];
                    w.write_record([
                        trial.to_string(),
                        label.clone(),
                        sel.first_contact_us.to_string(),
                        sets[sel.index].frame_index.to_string(),
                        sel.frames_in_window.to_string(),
                        predicted_name(c),
                        c.no_contact.to_string(),
                    ])?;
                }
                None => w.write_record([trial.to_string(), label, String::new(), String::new(), "0".into(), String::new(), "true".into()])?,
            }
        }
    }
    predictions.flush()?;
    if let Some(mut w) = rapid {
        w.flush()?;
    }

    let mut out = csv_writer(&cfg.out.join("confusion.csv"))?;
    let mut header = vec!["true_label".to_string()];
    header.extend(names.iter().cloned());
    header.push("no_contact".into());
    out.write_record(&header)?;
    let (mut hits, mut total) = (0u64, 0u64);
    for (i, (label, counts)) in truth_labels.iter().zip(&confusion).enumerate() {
        if counts.iter().all(|&n| n == 0) && i < names.len() {
            continue;
        }
        let mut row = vec![label.clone()];
        row.extend(counts.iter().map(u64::to_string));
        out.write_record(&row)?;
        total += counts.iter().sum::<u64>();
        if i < names.len() {
            hits += counts[i];
        }
    }
    out.flush()?;
    println!("{hits}/{total} frames classified correctly against {} classes", names.len());
    Ok(())
}
