//! Training patches: random extraction from active frames and coherence
//! pruning.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::frame::{PixelIndex, TactileFrame};
use crate::omp::{dot, norm};

/// Flattened training patches with their origin.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PatchSet {
    pub patch_rows: usize,
    pub patch_cols: usize,
    pub patches: Vec<Vec<f64>>,
    /// `(frame index, top-left pixel)` of every patch.
    pub provenance: Vec<(usize, PixelIndex)>,
}

impl PatchSet {
    pub fn new(patch_rows: usize, patch_cols: usize) -> Self {
        Self { patch_rows, patch_cols, ..Default::default() }
    }

    pub fn len(&self) -> usize {
        self.patches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patches.is_empty()
    }

    pub fn push(&mut self, patch: Vec<f64>, origin: (usize, PixelIndex)) {
        debug_assert_eq!(patch.len(), self.patch_rows * self.patch_cols);
        self.patches.push(patch);
        self.provenance.push(origin);
    }
}

/// Outcome of [`extract_patches`].
#[derive(Debug, Clone, PartialEq)]
pub struct PatchExtraction {
    pub set: PatchSet,
    /// Fewer than the requested count could be found.
    pub exhausted: bool,
}

fn crop(frame: &TactileFrame, origin: PixelIndex, pr: usize, pc: usize) -> Vec<f64> {
    let v = frame.values();
    let cols = frame.cols();
    let mut patch = Vec::with_capacity(pr * pc);
    for r in origin.row..origin.row + pr {
        patch.extend_from_slice(&v[r * cols + origin.col..r * cols + origin.col + pc]);
    }
    patch
}

/// Draws `count` random patches from the frames whose peak exceeds
/// `active_thr`, keeping only patches with more than `min_active` pixels above
/// `active_thr`.
pub fn extract_patches(
    frames: &[TactileFrame],
    patch_rows: usize,
    patch_cols: usize,
    count: usize,
    min_active: usize,
    active_thr: f64,
    seed: u64,
) -> Result<PatchExtraction> {
    if count == 0 {
        return Err(Error::InvalidArgument("patch count must be positive".into()));
    }
    if patch_rows == 0 || patch_cols == 0 {
        return Err(Error::InvalidArgument("empty patch shape".into()));
    }
    if let Some(f) = frames.iter().find(|f| f.rows() < patch_rows || f.cols() < patch_cols) {
        return Err(Error::InvalidArgument(format!(
            "{patch_rows}x{patch_cols} patch does not fit a {}x{} frame",
            f.rows(),
            f.cols()
        )));
    }
    let mut set = PatchSet::new(patch_rows, patch_cols);
    let active: Vec<usize> = frames
        .iter()
        .enumerate()
        .filter(|(_, f)| f.max() > active_thr)
        .map(|(i, _)| i)
        .collect();
    if active.is_empty() {
        return Ok(PatchExtraction { set, exhausted: true });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_attempts = count.saturating_mul(50).saturating_add(1000);
    let mut attempts = 0;
    while set.len() < count && attempts < max_attempts {
        attempts += 1;
        let fi = active[rng.random_range(0..active.len())];
        let frame = &frames[fi];
        let origin = PixelIndex::new(
            rng.random_range(0..=frame.rows() - patch_rows),
            rng.random_range(0..=frame.cols() - patch_cols),
        );
        let patch = crop(frame, origin, patch_rows, patch_cols);
        if patch.iter().filter(|&&v| v > active_thr).count() > min_active {
            set.push(patch, (fi, origin));
        }
    }
    let exhausted = set.len() < count;
    Ok(PatchExtraction { set, exhausted })
}

fn normalized(v: &[f64]) -> Option<Vec<f64>> {
    let n = norm(v);
    (n > 0.0 && n.is_finite()).then(|| v.iter().map(|x| x / n).collect())
}

/// Mutual coherence: the largest absolute inner product between distinct
/// normalized vectors.
pub fn coherence(vectors: &[Vec<f64>]) -> Result<f64> {
    if vectors.len() < 2 {
        return Err(Error::InvalidArgument("coherence needs at least two vectors".into()));
    }
    let unit: Vec<Vec<f64>> = vectors
        .iter()
        .map(|v| normalized(v).ok_or_else(|| Error::InvalidArgument("zero vector".into())))
        .collect::<Result<_>>()?;
    if unit.iter().any(|u| u.len() != unit[0].len()) {
        return Err(Error::DimensionMismatch("vectors differ in length".into()));
    }
    let mut mu: f64 = 0.0;
    for i in 0..unit.len() {
        for j in i + 1..unit.len() {
            mu = mu.max(dot(&unit[i], &unit[j]).abs());
        }
    }
    Ok(mu.min(1.0))
}

/// Inner products this close to one count as duplicates.
const DUPLICATE_TOL: f64 = 1e-9;

/// Greedy pruning in input order: a patch survives if its normalized inner
/// product with every surviving patch is at most `mu_max` and it is not a
/// duplicate of one. Zero patches are dropped.
pub fn prune_coherent(patches: &PatchSet, mu_max: f64) -> Result<PatchSet> {
    if !(mu_max > 0.0 && mu_max <= 1.0) {
        return Err(Error::InvalidArgument(format!("mu_max = {mu_max} outside (0, 1]")));
    }
    let mut out = PatchSet::new(patches.patch_rows, patches.patch_cols);
    let mut kept_unit: Vec<Vec<f64>> = Vec::new();
    for (patch, origin) in patches.patches.iter().zip(&patches.provenance) {
        let Some(u) = normalized(patch) else { continue };
        let clashes = kept_unit.iter().any(|k| {
            let ip = dot(k, &u).abs();
            ip > mu_max || ip >= 1.0 - DUPLICATE_TOL
        });
        if !clashes {
            kept_unit.push(u);
            out.push(patch.clone(), *origin);
        }
    }
    Ok(out)
}
