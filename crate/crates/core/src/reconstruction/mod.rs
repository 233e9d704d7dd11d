//! Full-frame recovery from subsampled measurements.
//!
//! The frame is tiled with overlapping patches. For every patch the
//! dictionary rows at the measured in-patch pixels form a small operator;
//! OMP recovers a sparse code from the in-patch readings and the full
//! dictionary synthesizes the patch. Overlapping estimates are averaged.

mod interp;

pub use interp::interpolate_values;

use serde::{Deserialize, Serialize};

use crate::dictionary::Dictionary;
use crate::error::{Error, Result};
use crate::frame::{MeasurementSet, PixelIndex, TactileFrame};
use crate::omp::{default_tolerance, omp};
use crate::par::Exec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionParams {
    pub patch_rows: usize,
    pub patch_cols: usize,
    pub overlap: usize,
    /// Per-patch sparsity as a fraction of the in-patch measurement count.
    pub sparsity_fraction: f64,
    pub min_patch_measurements: usize,
    pub nonneg_clamp: bool,
    #[serde(skip)]
    pub exec: Exec,
}

impl Default for ReconstructionParams {
    fn default() -> Self {
        Self {
            patch_rows: 8,
            patch_cols: 8,
            overlap: 4,
            sparsity_fraction: 0.25,
            min_patch_measurements: 1,
            nonneg_clamp: true,
            exec: Exec::default(),
        }
    }
}

impl ReconstructionParams {
    pub fn validate(&self) -> Result<()> {
        if self.patch_rows == 0 || self.patch_cols == 0 {
            return Err(Error::InvalidArgument("empty patch".into()));
        }
        if self.overlap == 0 || self.overlap >= self.patch_rows.min(self.patch_cols) {
            return Err(Error::InvalidArgument(format!(
                "overlap {} outside (0, {})",
                self.overlap,
                self.patch_rows.min(self.patch_cols)
            )));
        }
        if !(self.sparsity_fraction > 0.0 && self.sparsity_fraction <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "sparsity fraction {} outside (0, 1]",
                self.sparsity_fraction
            )));
        }
        Ok(())
    }

    /// Sparsity used for a patch with `m` measurements: `max(1, ceil(f * m))`.
    pub fn patch_sparsity(&self, m: usize) -> usize {
        ((self.sparsity_fraction * m as f64).ceil() as usize).max(1)
    }
}

fn axis_origins(n: usize, patch: usize, stride: usize) -> Vec<usize> {
    let mut origins: Vec<usize> = (0..).map(|k| k * stride).take_while(|o| o + patch <= n).collect();
    if let Some(&last) = origins.last() {
        if last + patch < n {
            origins.push(n - patch);
        }
    }
    origins
}

/// Top-left corners of the patch tiling, row-major. Patches step by
/// `patch - overlap`; a final patch is clamped against the far border when
/// the stride does not land on it.
pub fn patch_grid(rows: usize, cols: usize, params: &ReconstructionParams) -> Result<Vec<PixelIndex>> {
    params.validate()?;
    let (pr, pc) = (params.patch_rows, params.patch_cols);
    if pr > rows || pc > cols {
        return Err(Error::InvalidArgument(format!("{pr}x{pc} patch larger than {rows}x{cols} sensor")));
    }
    let rs = axis_origins(rows, pr, pr - params.overlap);
    let cs = axis_origins(cols, pc, pc - params.overlap);
    Ok(rs.iter().flat_map(|&r| cs.iter().map(move |&c| PixelIndex::new(r, c))).collect())
}

/// Reusable patchwise reconstructor for one sensor shape.
#[derive(Debug, Clone)]
pub struct PatchReconstructor<'a> {
    dict: &'a Dictionary,
    params: ReconstructionParams,
    rows: usize,
    cols: usize,
    grid: Vec<PixelIndex>,
}

impl<'a> PatchReconstructor<'a> {
    pub fn new(dict: &'a Dictionary, params: ReconstructionParams, rows: usize, cols: usize) -> Result<Self> {
        if dict.patch_rows() != params.patch_rows || dict.patch_cols() != params.patch_cols {
            return Err(Error::DimensionMismatch(format!(
                "dictionary patches are {}x{}, parameters ask for {}x{}",
                dict.patch_rows(),
                dict.patch_cols(),
                params.patch_rows,
                params.patch_cols
            )));
        }
        let grid = patch_grid(rows, cols, &params)?;
        Ok(Self { dict, params, rows, cols, grid })
    }

    pub fn grid(&self) -> &[PixelIndex] {
        &self.grid
    }

    fn solve_patch(&self, origin: PixelIndex, measured: &[Option<f64>]) -> Result<Option<Vec<f64>>> {
        let (pr, pc) = (self.params.patch_rows, self.params.patch_cols);
        let mut offsets = Vec::new();
        let mut y = Vec::new();
        for r in 0..pr {
            for c in 0..pc {
                if let Some(v) = measured[(origin.row + r) * self.cols + origin.col + c] {
                    offsets.push(r * pc + c);
                    y.push(v);
                }
            }
        }
        let m = offsets.len();
        if m < self.params.min_patch_measurements.max(1) {
            return Ok(None);
        }
        let a = self.dict.restrict(&offsets)?;
        let sparsity = self.params.patch_sparsity(m).min(m).min(a.cols());
        let sol = omp(&a, &y, sparsity, default_tolerance(&y))?;
        Ok(Some(self.dict.synthesize(&sol.code)))
    }

    /// Reconstructed pixel values, clamped at zero when `nonneg_clamp` is set.
    pub fn reconstruct_values(&self, meas: &MeasurementSet) -> Result<Vec<f64>> {
        if meas.is_empty() {
            return Err(Error::Empty("measurement set"));
        }
        if meas.rows != self.rows || meas.cols != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "measurements are {}x{}, reconstructor expects {}x{}",
                meas.rows, meas.cols, self.rows, self.cols
            )));
        }
        let mut measured = vec![None; self.rows * self.cols];
        for m in meas.measurements() {
            measured[m.pixel.linear(self.cols)] = Some(m.value);
        }
        let estimates = self.params.exec.map_slice(&self.grid, |&origin| self.solve_patch(origin, &measured));

        let (pr, pc) = (self.params.patch_rows, self.params.patch_cols);
        let mut sum = vec![0.0; self.rows * self.cols];
        let mut count = vec![0u32; self.rows * self.cols];
        for (origin, est) in self.grid.iter().zip(estimates) {
            let est = est?;
            for r in 0..pr {
                for c in 0..pc {
                    let idx = (origin.row + r) * self.cols + origin.col + c;
                    if let Some(patch) = &est {
                        sum[idx] += patch[r * pc + c];
                    }
                    count[idx] += 1;
                }
            }
        }
        let mut values: Vec<f64> = sum.iter().zip(&count).map(|(s, &n)| s / n as f64).collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("non-finite reconstruction".into()));
        }
        if self.params.nonneg_clamp {
            values.iter_mut().for_each(|v| *v = v.max(0.0));
        }
        Ok(values)
    }

    /// Reconstructed frame. Frames hold non-negative pressure, so negative
    /// estimates are clamped here even when `nonneg_clamp` is off.
    pub fn reconstruct(&self, meas: &MeasurementSet) -> Result<TactileFrame> {
        let values = self.reconstruct_values(meas)?.into_iter().map(|v| v.max(0.0)).collect();
        TactileFrame::new(self.rows, self.cols, values, meas.measurements()[0].t_us)
    }
}

/// Patchwise sparse reconstruction of one frame.
pub fn reconstruct_frame(
    meas: &MeasurementSet,
    dict: &Dictionary,
    params: &ReconstructionParams,
) -> Result<TactileFrame> {
    PatchReconstructor::new(dict, *params, meas.rows, meas.cols)?.reconstruct(meas)
}

/// Linear-interpolation baseline, clamped to non-negative pressure.
pub fn interpolate_baseline(meas: &MeasurementSet, rows: usize, cols: usize) -> Result<TactileFrame> {
    let values = interpolate_values(meas, rows, cols)?.into_iter().map(|v| v.max(0.0)).collect();
    TactileFrame::new(rows, cols, values, meas.measurements()[0].t_us)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dictionary::overcomplete_dct;
    use crate::frame::{Measurement, Scheme};
    use crate::sampling::raster_plan;

    fn p(r: usize, c: usize) -> PixelIndex {
        PixelIndex::new(r, c)
    }

    #[test]
    fn grid_32_by_8_overlap_4() {
        let g = patch_grid(32, 32, &ReconstructionParams::default()).unwrap();
        assert_eq!(g.len(), 49);
        assert_eq!(g[0], p(0, 0));
        assert_eq!(g[48], p(24, 24));
    }

    #[test]
    fn grid_single_and_clamped() {
        assert_eq!(patch_grid(8, 8, &ReconstructionParams::default()).unwrap(), vec![p(0, 0)]);
        let g = patch_grid(9, 9, &ReconstructionParams::default()).unwrap();
        assert_eq!(g, vec![p(0, 0), p(0, 1), p(1, 0), p(1, 1)]);
        assert!(patch_grid(7, 9, &ReconstructionParams::default()).is_err());
    }

    #[test]
    fn param_validation() {
        let bad = ReconstructionParams { overlap: 8, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = ReconstructionParams { sparsity_fraction: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let ok = ReconstructionParams::default();
        assert_eq!(ok.patch_sparsity(1), 1);
        assert_eq!(ok.patch_sparsity(5), 2);
        assert_eq!(ok.patch_sparsity(8), 2);
    }

    #[test]
    fn full_raster_complete_basis_is_exact() {
        let dict = overcomplete_dct(8, 8, 64).unwrap();
        let values: Vec<f64> = (0..256).map(|i| ((i * 37) % 11) as f64).collect();
        let frame = TactileFrame::new(16, 16, values, 0).unwrap();
        let ms = raster_plan(16, 16)
            .into_iter()
            .map(|px| Measurement { pixel: px, value: frame.get(px), t_us: 0 })
            .collect();
        let meas = MeasurementSet::new(16, 16, Scheme::FullRaster, 0, 0, ms).unwrap();
        let params = ReconstructionParams { sparsity_fraction: 1.0, ..Default::default() };
        let rec = reconstruct_frame(&meas, &dict, &params).unwrap();
        for (a, b) in rec.values().iter().zip(frame.values()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_measurements_give_zero_frame() {
        let dict = overcomplete_dct(8, 8, 100).unwrap();
        let ms = [p(3, 3), p(10, 12), p(15, 0)]
            .into_iter()
            .map(|px| Measurement { pixel: px, value: 0.0, t_us: 0 })
            .collect();
        let meas = MeasurementSet::new(16, 16, Scheme::Random, 0, 0, ms).unwrap();
        let rec = reconstruct_frame(&meas, &dict, &ReconstructionParams::default()).unwrap();
        assert!(rec.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn mismatched_dictionary_is_rejected() {
        let dict = overcomplete_dct(4, 4, 16).unwrap();
        let meas = MeasurementSet::new(16, 16, Scheme::Random, 0, 0, vec![Measurement { pixel: p(0, 0), value: 1.0, t_us: 0 }]).unwrap();
        assert!(reconstruct_frame(&meas, &dict, &ReconstructionParams::default()).is_err());
        let empty = MeasurementSet::new(16, 16, Scheme::Random, 0, 0, vec![]).unwrap();
        let dict = overcomplete_dct(8, 8, 64).unwrap();
        assert!(reconstruct_frame(&empty, &dict, &ReconstructionParams::default()).is_err());
    }
}
