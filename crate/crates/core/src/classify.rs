//! Sparse-representation classification over a library of labeled exemplar
//! frames, and classification shortly after first contact.

use crate::error::{Error, Result};
use crate::frame::{MeasurementSet, TactileFrame};
use crate::omp::{axpy, default_tolerance, norm, omp, LinearOperator};
use crate::sampling::{frame_time_us, MeasurementClock, Sampler, SamplingConfig};
use crate::source::FrameSource;

/// Default number of key frames kept per class.
pub const DEFAULT_FRAMES_PER_CLASS: usize = 5;

/// Unit-norm exemplar frames with class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct SrcLibrary {
    pub rows: usize,
    pub cols: usize,
    pub class_names: Vec<String>,
    /// `(class index, unit-norm exemplar of length rows * cols)`.
    pub entries: Vec<(usize, Vec<f64>)>,
}

impl SrcLibrary {
    /// Builds a library from raw exemplars, normalizing each one.
    pub fn new(rows: usize, cols: usize, class_names: Vec<String>, entries: Vec<(usize, Vec<f64>)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Empty("library entries"));
        }
        let mut has = vec![false; class_names.len()];
        let mut normalized = Vec::with_capacity(entries.len());
        for (class, v) in entries {
            if class >= class_names.len() {
                return Err(Error::InvalidArgument(format!("class index {class} without a name")));
            }
            if v.len() != rows * cols {
                return Err(Error::DimensionMismatch(format!("exemplar of length {} for {rows}x{cols}", v.len())));
            }
            let n = norm(&v);
            if !(n > 0.0 && n.is_finite()) {
                return Err(Error::InvalidArgument("exemplar cannot be normalized".into()));
            }
            has[class] = true;
            normalized.push((class, v.iter().map(|x| x / n).collect()));
        }
        if let Some(c) = has.iter().position(|h| !h) {
            return Err(Error::InvalidArgument(format!("class {:?} has no exemplar", class_names[c])));
        }
        Ok(Self { rows, cols, class_names, entries: normalized })
    }

    pub fn class_count(&self) -> usize {
        self.class_names.len()
    }

    /// Library columns restricted to the measured pixels, in measurement order,
    /// scored with their full (unit) norm.
    fn restricted(&self, meas: &MeasurementSet) -> Result<LinearOperator> {
        let m = meas.len();
        let mut data = Vec::with_capacity(m * self.entries.len());
        for (_, e) in &self.entries {
            data.extend(meas.pixels().map(|p| e[p.linear(self.cols)]));
        }
        LinearOperator::from_columns(m, self.entries.len(), data)?.with_selection_scale(vec![1.0; self.entries.len()])
    }
}

/// Index of the nearest-rank `q`-quantile in ascending `sorted`.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let k = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[k - 1]
}

/// Picks, per class, the `frames_per_class` frames with the largest total
/// pressure among frames at or above the class's `pressure_quantile` of total
/// pressure. Ties go to the earlier frame.
pub fn build_src_library(
    labeled_streams: &[(String, Vec<TactileFrame>)],
    frames_per_class: usize,
    pressure_quantile: f64,
) -> Result<SrcLibrary> {
    if frames_per_class == 0 {
        return Err(Error::InvalidArgument("frames_per_class must be positive".into()));
    }
    if !(0.0..=1.0).contains(&pressure_quantile) {
        return Err(Error::InvalidArgument(format!("quantile {pressure_quantile} outside [0, 1]")));
    }
    let first = labeled_streams
        .iter()
        .flat_map(|(_, fs)| fs.first())
        .next()
        .ok_or(Error::Empty("labeled streams"))?;
    let (rows, cols) = (first.rows(), first.cols());
    let mut names = Vec::new();
    let mut entries = Vec::new();
    for (class, (name, frames)) in labeled_streams.iter().enumerate() {
        if let Some(f) = frames.iter().find(|f| f.rows() != rows || f.cols() != cols) {
            return Err(Error::DimensionMismatch(format!("class {name:?} has a {}x{} frame", f.rows(), f.cols())));
        }
        let mut totals: Vec<f64> = frames.iter().map(TactileFrame::total).collect();
        totals.sort_by(f64::total_cmp);
        let floor = if totals.is_empty() { 0.0 } else { quantile(&totals, pressure_quantile) };
        let mut candidates: Vec<(usize, f64)> = frames
            .iter()
            .enumerate()
            .map(|(i, f)| (i, f.total()))
            .filter(|&(_, t)| t > 0.0 && t >= floor)
            .collect();
        if candidates.len() < frames_per_class {
            return Err(Error::InvalidArgument(format!(
                "class {name:?} has {} usable frames, need {frames_per_class}",
                candidates.len()
            )));
        }
        candidates.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        for &(i, _) in &candidates[..frames_per_class] {
            entries.push((class, frames[i].values().to_vec()));
        }
        names.push(name.clone());
    }
    SrcLibrary::new(rows, cols, names, entries)
}

/// Outcome of one classification.
#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    /// Class with the smallest residual (lowest index on ties).
    pub class: usize,
    /// The measurement carried too little load to be called a contact.
    pub no_contact: bool,
    pub residuals: Vec<f64>,
}

impl Classification {
    pub fn label(&self) -> Option<usize> {
        (!self.no_contact).then_some(self.class)
    }
}

/// Default SRC sparsity `max(1, ceil(M / 4))`.
pub fn default_src_sparsity(measurements: usize) -> usize {
    (measurements.div_ceil(4)).max(1)
}

/// Sparse-codes the measurements against the restricted library and assigns
/// the class whose share of the code leaves the smallest residual.
///
/// `no_contact` is set when `||y|| < contact_thr * sqrt(M)` or `y = 0`.
pub fn src_classify(
    meas: &MeasurementSet,
    lib: &SrcLibrary,
    sparsity: Option<usize>,
    contact_thr: f64,
) -> Result<Classification> {
    if meas.is_empty() {
        return Err(Error::Empty("measurement set"));
    }
    if meas.rows != lib.rows || meas.cols != lib.cols {
        return Err(Error::DimensionMismatch(format!(
            "measurements are {}x{}, library is {}x{}",
            meas.rows, meas.cols, lib.rows, lib.cols
        )));
    }
    let y: Vec<f64> = meas.values().collect();
    let y_norm = norm(&y);
    let a = lib.restricted(meas)?;
    let s = sparsity.unwrap_or_else(|| default_src_sparsity(y.len())).clamp(1, a.rows().min(a.cols()));
    let sol = omp(&a, &y, s, default_tolerance(&y))?;

    let mut fits = vec![vec![0.0; y.len()]; lib.class_count()];
    for (j, c) in sol.code.iter() {
        axpy(c, a.column(j), &mut fits[lib.entries[j].0]);
    }
    let residuals: Vec<f64> = fits
        .iter()
        .map(|fit| y.iter().zip(fit).map(|(yi, fi)| (yi - fi).powi(2)).sum::<f64>().sqrt())
        .collect();
    let class = residuals
        .iter()
        .enumerate()
        .fold(0, |best, (c, r)| if *r < residuals[best] { c } else { best });
    let no_contact = y_norm == 0.0 || y_norm < contact_thr * (y.len() as f64).sqrt();
    Ok(Classification { class, no_contact, residuals })
}

/// Whole frames that fit in a window: `floor(window / frame time)`.
pub fn complete_frames_in_window(window_ms: f64, measurements: usize, sample_rate_hz: f64) -> usize {
    (window_ms * 1000.0 / frame_time_us(measurements, sample_rate_hz)).floor() as usize
}

/// Which recorded frame to classify after first contact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RapidSelection {
    /// Position of the chosen set in the input slice.
    pub index: usize,
    pub first_contact_us: u64,
    /// Frames acquired entirely after first contact and by the deadline.
    pub frames_in_window: usize,
}

/// First contact is the first reading above `contact_thr`. The chosen frame
/// is the last one whose final reading falls within `window_ms` of first
/// contact; if even the contact frame ends later, the contact frame is used.
/// Returns `None` when no reading exceeds the threshold.
pub fn select_rapid_frame(sets: &[MeasurementSet], window_ms: f64, contact_thr: f64) -> Option<RapidSelection> {
    let (contact_idx, first_contact_us) = sets.iter().enumerate().find_map(|(k, s)| {
        s.measurements().iter().find(|m| m.value > contact_thr).map(|m| (k, m.t_us))
    })?;
    let deadline = first_contact_us + (window_ms * 1000.0).round() as u64;
    let mut index = contact_idx;
    let mut frames_in_window = 0;
    for (k, s) in sets.iter().enumerate().skip(contact_idx + 1) {
        match s.end_us() {
            Some(end) if end <= deadline => {
                index = k;
                frames_in_window += 1;
            }
            Some(_) => break,
            None => {}
        }
    }
    Some(RapidSelection { index, first_contact_us, frames_in_window })
}

/// Result of classifying right after first contact.
#[derive(Debug, Clone, PartialEq)]
pub struct RapidOutcome {
    pub classification: Classification,
    pub selection: RapidSelection,
    /// Frame index of the classified measurement set.
    pub frame_used: u32,
}

/// Samples `source` frame after frame from `t = 0` until the window after
/// first contact has passed, then classifies the frame picked by
/// [`select_rapid_frame`].
pub fn rapid_classify<S: FrameSource + ?Sized>(
    source: &S,
    lib: &SrcLibrary,
    cfg: &SamplingConfig,
    window_ms: f64,
    contact_thr: f64,
    sample_rate_hz: f64,
) -> Result<RapidOutcome> {
    if !(window_ms > 0.0) {
        return Err(Error::InvalidArgument(format!("window {window_ms} ms")));
    }
    let sampler = Sampler::new(cfg.clone(), source.rows(), source.cols())?;
    let mut clock = MeasurementClock::new(sample_rate_hz);
    let duration = source.duration_us();
    let window_us = (window_ms * 1000.0).round() as u64;
    let mut sets = Vec::new();
    let mut deadline: Option<u64> = None;
    for k in 0u64.. {
        let start = clock.now_us();
        match deadline {
            Some(d) if start > d => break,
            None if start > duration => return Err(Error::NoContact(duration)),
            _ => {}
        }
        let set = sampler.sample_frame(source, k, &mut clock)?;
        if deadline.is_none() {
            if let Some(m) = set.measurements().iter().find(|m| m.value > contact_thr) {
                deadline = Some(m.t_us + window_us);
            }
        }
        sets.push(set);
    }
    let selection = select_rapid_frame(&sets, window_ms, contact_thr).ok_or(Error::NoContact(duration))?;
    let chosen = &sets[selection.index];
    let classification = src_classify(chosen, lib, None, 0.0)?;
    Ok(RapidOutcome { classification, selection, frame_used: chosen.frame_index })
}
