//! Per-frame subsampling plans and their execution under the measurement clock.

mod binary;
mod clock;
mod plans;

pub use binary::{binary_sample, build_binary_order, NeighborOrder};
pub use clock::{frame_rate, frame_time_us, MeasurementClock, DEFAULT_SAMPLE_RATE_HZ};
pub use plans::{random_plan, raster_plan, uniform_plan, uniform_stride};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{Measurement, MeasurementSet, PixelIndex, Scheme};
use crate::source::FrameSource;

/// Default neighbor-search threshold as a fraction of full-scale pressure.
pub const DEFAULT_NS_THR_FRACTION: f64 = 0.05;

/// Parameters of a subsampling run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingConfig {
    pub scheme: Scheme,
    /// Reads per frame.
    pub measurements: usize,
    /// Neighbor-search threshold (binary scheme only).
    pub ns_thr: f64,
    /// Random scheme seed.
    pub seed: u64,
    /// Added to the frame counter when choosing the uniform lattice phase.
    pub uniform_phase: u64,
    #[serde(skip)]
    pub neighbor_order: NeighborOrder,
}

impl SamplingConfig {
    pub fn new(scheme: Scheme, measurements: usize) -> Self {
        Self {
            scheme,
            measurements,
            ns_thr: DEFAULT_NS_THR_FRACTION,
            seed: 0,
            uniform_phase: 0,
            neighbor_order: NeighborOrder::default(),
        }
    }

    pub fn with_ns_thr(mut self, ns_thr: f64) -> Self {
        self.ns_thr = ns_thr;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self, rows: usize, cols: usize) -> Result<()> {
        let n = rows * cols;
        if self.measurements == 0 || self.measurements > n {
            return Err(Error::InvalidArgument(format!(
                "M = {} outside [1, {n}]",
                self.measurements
            )));
        }
        if self.ns_thr.is_nan() || self.ns_thr < 0.0 {
            return Err(Error::InvalidArgument(format!("ns_thr = {}", self.ns_thr)));
        }
        if self.scheme == Scheme::Binary && rows != cols {
            return Err(Error::InvalidArgument("binary sampling needs a square array".into()));
        }
        Ok(())
    }
}

/// Reads `plan` in order, one clock period per read.
pub fn execute_plan<S: FrameSource + ?Sized>(
    source: &S,
    plan: &[PixelIndex],
    clock: &mut MeasurementClock,
) -> Result<MeasurementSet> {
    let (rows, cols) = (source.rows(), source.cols());
    let mut seen = vec![false; rows * cols];
    for p in plan {
        if p.row >= rows || p.col >= cols {
            return Err(Error::InvalidArgument(format!("pixel ({}, {}) outside {rows}x{cols}", p.row, p.col)));
        }
        let idx = p.linear(cols);
        if seen[idx] {
            return Err(Error::DuplicatePixel { row: p.row, col: p.col });
        }
        seen[idx] = true;
    }
    let measurements = plan
        .iter()
        .map(|&pixel| {
            let t_us = clock.tick();
            Measurement { pixel, value: source.read(pixel, t_us), t_us }
        })
        .collect();
    MeasurementSet::new(rows, cols, Scheme::FullRaster, 0, 0, measurements)
}

/// Samples frames from a source with a fixed configuration.
///
/// The binary probe order is built once and reused for every frame.
#[derive(Debug, Clone)]
pub struct Sampler {
    cfg: SamplingConfig,
    rows: usize,
    cols: usize,
    binary_order: Vec<PixelIndex>,
}

impl Sampler {
    pub fn new(cfg: SamplingConfig, rows: usize, cols: usize) -> Result<Self> {
        cfg.validate(rows, cols)?;
        let binary_order = if cfg.scheme == Scheme::Binary {
            build_binary_order(rows, cols)?
        } else {
            Vec::new()
        };
        Ok(Self { cfg, rows, cols, binary_order })
    }

    pub fn config(&self) -> &SamplingConfig {
        &self.cfg
    }

    /// Non-adaptive plan for a frame, `None` for the binary scheme.
    pub fn plan(&self, frame_index: u64) -> Result<Option<Vec<PixelIndex>>> {
        let (rows, cols, m) = (self.rows, self.cols, self.cfg.measurements);
        Ok(match self.cfg.scheme {
            Scheme::Uniform => Some(uniform_plan(rows, cols, m, frame_index + self.cfg.uniform_phase)?),
            Scheme::Random => Some(random_plan(rows, cols, m, self.cfg.seed, frame_index)?),
            Scheme::FullRaster => Some(raster_plan(rows, cols).into_iter().take(m).collect()),
            Scheme::Binary => None,
        })
    }

    /// Acquires one frame starting at the clock's current time.
    pub fn sample_frame<S: FrameSource + ?Sized>(
        &self,
        source: &S,
        frame_index: u64,
        clock: &mut MeasurementClock,
    ) -> Result<MeasurementSet> {
        if source.rows() != self.rows || source.cols() != self.cols {
            return Err(Error::DimensionMismatch(format!(
                "source is {}x{}, sampler expects {}x{}",
                source.rows(),
                source.cols(),
                self.rows,
                self.cols
            )));
        }
        let mut set = match self.plan(frame_index)? {
            Some(plan) => execute_plan(source, &plan, clock)?,
            None => binary_sample(
                source,
                &self.binary_order,
                self.cfg.measurements,
                self.cfg.ns_thr,
                &self.cfg.neighbor_order,
                clock,
            )?,
        };
        set.scheme = self.cfg.scheme;
        set.frame_index = u32::try_from(frame_index).unwrap_or(u32::MAX);
        set.seed = self.cfg.seed;
        Ok(set)
    }

    /// Acquires back-to-back frames until the clock passes `end_us`.
    ///
    /// Only frames that start at or before `end_us` are returned.
    pub fn sample_stream<S: FrameSource + ?Sized>(
        &self,
        source: &S,
        clock: &mut MeasurementClock,
        end_us: u64,
    ) -> Result<Vec<MeasurementSet>> {
        let mut frames = Vec::new();
        let mut k = 0u64;
        while clock.now_us() <= end_us {
            frames.push(self.sample_frame(source, k, clock)?);
            k += 1;
        }
        Ok(frames)
    }
}
