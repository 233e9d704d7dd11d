//! `gen-dict` and `train-dict`.

use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use tactile_core::dictionary::{
    extract_patches, ksvd_train, overcomplete_dct, overcomplete_haar, prune_coherent, KsvdParams,
};
use tactile_core::io::{read_frame_stream, write_dictionary_file};

use crate::support::{csv_writer, load_config, num, overlay, prepare_out, usage};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum DictKind {
    Dct,
    Haar,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default, deny_unknown_fields)]
pub struct GenDictConfig {
    pub kind: DictKind,
    pub patch_rows: usize,
    pub patch_cols: usize,
    /// DCT only; must be a perfect square.
    pub atoms: usize,
    /// Haar only.
    pub shift_step: usize,
    /// Haar only.
    pub max_level: usize,
    pub out: PathBuf,
}

impl Default for GenDictConfig {
    fn default() -> Self {
        Self { kind: DictKind::Dct, patch_rows: 8, patch_cols: 8, atoms: 256, shift_step: 4, max_level: 3, out: PathBuf::new() }
    }
}

#[derive(Debug, Args)]
pub struct GenDictArgs {
    /// Dictionary family.
    pub kind: Option<DictKind>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub patch_rows: Option<usize>,
    #[arg(long)]
    pub patch_cols: Option<usize>,
    #[arg(long)]
    pub atoms: Option<usize>,
    #[arg(long)]
    pub shift_step: Option<usize>,
    #[arg(long)]
    pub max_level: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn gen_dict(args: &GenDictArgs) -> Result<()> {
    let mut cfg: GenDictConfig = load_config(args.config.as_deref())?;
    overlay!(cfg, args, patch_rows, patch_cols, atoms, shift_step, max_level, out);
    if let Some(k) = args.kind {
        cfg.kind = k;
    }
    prepare_out(&cfg.out, &cfg)?;
    let dict = match cfg.kind {
        DictKind::Dct => overcomplete_dct(cfg.patch_rows, cfg.patch_cols, cfg.atoms)?,
        DictKind::Haar => overcomplete_haar(cfg.patch_rows, cfg.patch_cols, cfg.shift_step, cfg.max_level)?,
    };
    write_dictionary_file(cfg.out.join("dictionary.tdl"), &dict)?;
    println!("{} atoms of {}x{}", dict.atom_count(), dict.patch_rows(), dict.patch_cols());
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default, deny_unknown_fields)]
pub struct TrainDictConfig {
    /// Training frame streams (`.tfr`).
    pub inputs: Vec<PathBuf>,
    pub patch_rows: usize,
    pub patch_cols: usize,
    pub patch_count: usize,
    /// A patch is used only with more than this many active pixels.
    pub min_active: usize,
    /// Pressure above which a pixel counts as active.
    pub active_thr: f64,
    /// Coherence bound for pruning near-duplicate patches.
    pub mu_max: f64,
    pub atoms: usize,
    pub sparsity: usize,
    pub iterations: usize,
    pub seed: u64,
    pub out: PathBuf,
}

impl Default for TrainDictConfig {
    fn default() -> Self {
        Self {
            inputs: Vec::new(),
            patch_rows: 8,
            patch_cols: 8,
            patch_count: 4000,
            min_active: 15,
            active_thr: 0.02,
            mu_max: 0.99,
            atoms: 1000,
            sparsity: 13,
            iterations: 10,
            seed: 0,
            out: PathBuf::new(),
        }
    }
}

#[derive(Debug, Args)]
pub struct TrainDictArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Training stream; repeat for several.
    #[arg(long = "inputs", num_args = 1..)]
    pub inputs: Option<Vec<PathBuf>>,
    #[arg(long)]
    pub patch_rows: Option<usize>,
    #[arg(long)]
    pub patch_cols: Option<usize>,
    #[arg(long)]
    pub patch_count: Option<usize>,
    #[arg(long)]
    pub min_active: Option<usize>,
    #[arg(long)]
    pub active_thr: Option<f64>,
    #[arg(long)]
    pub mu_max: Option<f64>,
    #[arg(long)]
    pub atoms: Option<usize>,
    #[arg(long)]
    pub sparsity: Option<usize>,
    #[arg(long)]
    pub iterations: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn train_dict(args: &TrainDictArgs) -> Result<()> {
    let mut cfg: TrainDictConfig = load_config(args.config.as_deref())?;
    overlay!(
        cfg, args, inputs, patch_rows, patch_cols, patch_count, min_active, active_thr, mu_max, atoms, sparsity,
        iterations, seed, out
    );
    if cfg.inputs.is_empty() {
        return Err(usage("train-dict needs at least one input stream (--inputs)"));
    }
    prepare_out(&cfg.out, &cfg)?;

    let mut frames = Vec::new();
    for path in &cfg.inputs {
        frames.extend(read_frame_stream(path)?);
    }
    let extracted =
        extract_patches(&frames, cfg.patch_rows, cfg.patch_cols, cfg.patch_count, cfg.min_active, cfg.active_thr, cfg.seed)?;
    let patches = prune_coherent(&extracted.set, cfg.mu_max)?;
    let params = KsvdParams {
        atoms: cfg.atoms,
        sparsity: cfg.sparsity,
        iterations: cfg.iterations,
        seed: cfg.seed,
        ..KsvdParams::default()
    };
    let report = ksvd_train(&patches, &params)?;
    write_dictionary_file(cfg.out.join("dictionary.tdl"), &report.dictionary)?;

    let mut log = csv_writer(&cfg.out.join("training_log.csv"))?;
    log.write_record(["iteration", "mean_residual", "atoms_replaced"])?;
    for row in &report.log {
        log.write_record([row.iteration.to_string(), num(row.mean_residual), row.atoms_replaced.to_string()])?;
    }
    log.flush()?;
    println!(
        "{} patches ({} extracted{}), {} atoms",
        patches.len(),
        extracted.set.len(),
        if extracted.exhausted { ", fewer than requested" } else { "" },
        report.dictionary.atom_count()
    );
    Ok(())
}
