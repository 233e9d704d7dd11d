//! Dense frames, pixel addresses and subsampled measurement sets.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row/column address of one taxel, 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PixelIndex {
    pub row: usize,
    pub col: usize,
}

impl PixelIndex {
    pub const fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }

    /// Row-major linear offset in a grid with `cols` columns.
    #[inline]
    pub fn linear(self, cols: usize) -> usize {
        self.row * cols + self.col
    }

    #[inline]
    pub fn from_linear(index: usize, cols: usize) -> Self {
        Self::new(index / cols, index % cols)
    }
}

/// A dense pressure grid sampled at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct TactileFrame {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    pub timestamp_us: u64,
}

impl TactileFrame {
    /// Builds a frame, checking shape and that every value is finite and
    /// non-negative.
    pub fn new(rows: usize, cols: usize, values: Vec<f64>, timestamp_us: u64) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument(format!("frame dims {rows}x{cols}")));
        }
        if values.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {rows}x{cols} frame",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("frame values"));
        }
        if let Some(v) = values.iter().find(|v| **v < 0.0) {
            return Err(Error::InvalidArgument(format!("negative pressure {v}")));
        }
        Ok(Self { rows, cols, values, timestamp_us })
    }

    pub fn zeros(rows: usize, cols: usize, timestamp_us: u64) -> Self {
        assert!(rows > 0 && cols > 0, "frame dims must be positive");
        Self { rows, cols, values: vec![0.0; rows * cols], timestamp_us }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, p: PixelIndex) -> f64 {
        self.values[p.linear(self.cols)]
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn same_shape(&self, other: &TactileFrame) -> bool {
        self.rows == other.rows && self.cols == other.cols
    }
}

/// Which subsampling scheme produced a measurement set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Uniform,
    Random,
    Binary,
    FullRaster,
}

impl Scheme {
    pub fn code(self) -> u8 {
        match self {
            Scheme::Uniform => 0,
            Scheme::Random => 1,
            Scheme::Binary => 2,
            Scheme::FullRaster => 3,
        }
    }

    pub fn from_code(code: u8) -> Result<Self> {
        Ok(match code {
            0 => Scheme::Uniform,
            1 => Scheme::Random,
            2 => Scheme::Binary,
            3 => Scheme::FullRaster,
            other => return Err(Error::InvalidArgument(format!("scheme code {other}"))),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Uniform => "uniform",
            Scheme::Random => "random",
            Scheme::Binary => "binary",
            Scheme::FullRaster => "full-raster",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Scheme::Uniform),
            "random" => Ok(Scheme::Random),
            "binary" => Ok(Scheme::Binary),
            "full-raster" | "raster" | "full" => Ok(Scheme::FullRaster),
            other => Err(Error::InvalidArgument(format!("unknown scheme {other:?}"))),
        }
    }
}

/// One single-pixel reading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    pub pixel: PixelIndex,
    pub value: f64,
    pub t_us: u64,
}

/// The readings taken for one frame, in acquisition order.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSet {
    pub rows: usize,
    pub cols: usize,
    pub scheme: Scheme,
    pub frame_index: u32,
    pub seed: u64,
    measurements: Vec<Measurement>,
    /// Set when the sampler ran out of candidate pixels before reaching its
    /// measurement budget.
    pub exhausted: bool,
}

impl MeasurementSet {
    /// Validates pixel bounds, pixel uniqueness and time ordering.
    pub fn new(
        rows: usize,
        cols: usize,
        scheme: Scheme,
        frame_index: u32,
        seed: u64,
        measurements: Vec<Measurement>,
    ) -> Result<Self> {
        if measurements.len() > rows * cols {
            return Err(Error::InvalidArgument(format!(
                "{} measurements exceed {} pixels",
                measurements.len(),
                rows * cols
            )));
        }
        let mut seen = vec![false; rows * cols];
        let mut last_t = 0u64;
        for (k, m) in measurements.iter().enumerate() {
            let p = m.pixel;
            if p.row >= rows || p.col >= cols {
                return Err(Error::InvalidArgument(format!(
                    "pixel ({}, {}) outside {rows}x{cols}",
                    p.row, p.col
                )));
            }
            let idx = p.linear(cols);
            if seen[idx] {
                return Err(Error::DuplicatePixel { row: p.row, col: p.col });
            }
            seen[idx] = true;
            if k > 0 && m.t_us < last_t {
                return Err(Error::InvalidArgument("measurement times decrease".into()));
            }
            if !m.value.is_finite() {
                return Err(Error::NonFinite("measurement value"));
            }
            last_t = m.t_us;
        }
        Ok(Self { rows, cols, scheme, frame_index, seed, measurements, exhausted: false })
    }

    pub fn measurements(&self) -> &[Measurement] {
        &self.measurements
    }

    pub fn len(&self) -> usize {
        self.measurements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.measurements.is_empty()
    }

    pub fn pixels(&self) -> impl Iterator<Item = PixelIndex> + '_ {
        self.measurements.iter().map(|m| m.pixel)
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.measurements.iter().map(|m| m.value)
    }

    /// Time of the last reading, if any.
    pub fn end_us(&self) -> Option<u64> {
        self.measurements.last().map(|m| m.t_us)
    }

    /// Frame holding the measured values and zeros everywhere else.
    pub fn to_sparse_frame(&self) -> TactileFrame {
        let mut values = vec![0.0; self.rows * self.cols];
        for m in &self.measurements {
            values[m.pixel.linear(self.cols)] = m.value.max(0.0);
        }
        let t = self.measurements.first().map_or(0, |m| m.t_us);
        TactileFrame { rows: self.rows, cols: self.cols, values, timestamp_us: t }
    }
}
