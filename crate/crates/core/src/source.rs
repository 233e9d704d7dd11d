//! Pixel-at-a-time access to a time-varying pressure field.

use crate::error::{Error, Result};
use crate::frame::{PixelIndex, TactileFrame};

/// A sensor that can be queried one taxel at a time.
///
/// Reads must be pure: the same `(pixel, t_us)` always yields the same value.
pub trait FrameSource: Send + Sync {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    fn read(&self, pixel: PixelIndex, t_us: u64) -> f64;
    fn duration_us(&self) -> u64;

    /// Dense snapshot of the field at `t_us`.
    fn snapshot(&self, t_us: u64) -> TactileFrame {
        let (rows, cols) = (self.rows(), self.cols());
        let values = (0..rows * cols)
            .map(|i| self.read(PixelIndex::from_linear(i, cols), t_us).max(0.0))
            .collect();
        TactileFrame::new(rows, cols, values, t_us).expect("source produced an invalid frame")
    }
}

/// A single frame held forever.
impl FrameSource for TactileFrame {
    fn rows(&self) -> usize {
        TactileFrame::rows(self)
    }

    fn cols(&self) -> usize {
        TactileFrame::cols(self)
    }

    fn read(&self, pixel: PixelIndex, _t_us: u64) -> f64 {
        self.get(pixel)
    }

    fn duration_us(&self) -> u64 {
        0
    }
}

impl<S: FrameSource + ?Sized> FrameSource for &S {
    fn rows(&self) -> usize {
        (**self).rows()
    }
    fn cols(&self) -> usize {
        (**self).cols()
    }
    fn read(&self, pixel: PixelIndex, t_us: u64) -> f64 {
        (**self).read(pixel, t_us)
    }
    fn duration_us(&self) -> u64 {
        (**self).duration_us()
    }
}

/// How a replayed stream fills the gaps between stored frames.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Hold {
    #[default]
    ZeroOrder,
}

/// Replays recorded frames as a continuous-time source.
#[derive(Debug, Clone)]
pub struct ReplaySource {
    frames: Vec<TactileFrame>,
    hold: Hold,
}

impl ReplaySource {
    pub fn new(frames: Vec<TactileFrame>, hold: Hold) -> Result<Self> {
        let first = frames.first().ok_or(Error::Empty("replay frames"))?;
        for (k, f) in frames.iter().enumerate().skip(1) {
            if !f.same_shape(first) {
                return Err(Error::DimensionMismatch(format!(
                    "frame {k} is {}x{}, expected {}x{}",
                    f.rows(),
                    f.cols(),
                    first.rows(),
                    first.cols()
                )));
            }
            if f.timestamp_us <= frames[k - 1].timestamp_us {
                return Err(Error::NonMonotoneTimestamps(k));
            }
        }
        Ok(Self { frames, hold })
    }

    pub fn frames(&self) -> &[TactileFrame] {
        &self.frames
    }

    fn frame_at(&self, t_us: u64) -> &TactileFrame {
        match self.hold {
            Hold::ZeroOrder => {
                // Last frame with timestamp <= t, or the first frame before the stream starts.
                let k = self.frames.partition_point(|f| f.timestamp_us <= t_us);
                &self.frames[k.saturating_sub(1)]
            }
        }
    }
}

impl FrameSource for ReplaySource {
    fn rows(&self) -> usize {
        self.frames[0].rows()
    }

    fn cols(&self) -> usize {
        self.frames[0].cols()
    }

    fn read(&self, pixel: PixelIndex, t_us: u64) -> f64 {
        self.frame_at(t_us).get(pixel)
    }

    fn duration_us(&self) -> u64 {
        self.frames.last().map_or(0, |f| f.timestamp_us)
    }
}
