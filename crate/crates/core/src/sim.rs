//! Deterministic synthetic tactile scenes.
//!
//! Coordinates: rows grow downward, columns grow to the right, and angles are
//! measured counter-clockwise from the +column axis. A displacement along
//! angle `a` therefore moves `(-sin a, +cos a)` in `(row, col)`.
//!
//! Shapes are evaluated at pixel centers through a signed distance; pressure
//! is `peak` inside and falls off linearly over `edge_softness` pixels.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{PixelIndex, TactileFrame};
use crate::source::FrameSource;

/// Contact footprint geometry. `scale` and `width` on [`Phantom`] size it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Shape {
    /// Disk of radius `scale`.
    Disk,
    /// Axis-aligned (before rotation) square of side `scale`.
    Square,
    /// Two crossing bars of length `scale` and thickness `width`, at +-45 degrees.
    Cross,
    /// Bar of length `scale` and thickness `width`.
    Line,
    /// Annulus of mid radius `scale` and thickness `width`.
    Ring,
    /// Two disks of radius `width` whose centers are `scale` apart.
    TwoDisks,
    /// Three parallel bars of length `scale`, thickness `width`, spaced `2.5 * width`.
    ThreeLines,
    /// Equilateral triangle with circumradius `scale`.
    Triangle,
    /// Explicit footprint centered on the phantom center; `scale` is unused.
    Mask { rows: usize, cols: usize, cells: Vec<bool> },
}

/// A static contact footprint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phantom {
    pub shape: Shape,
    pub center_row: f64,
    pub center_col: f64,
    pub scale: f64,
    #[serde(default = "default_width")]
    pub width: f64,
    #[serde(default)]
    pub rotation_deg: f64,
    #[serde(default = "default_peak")]
    pub peak_pressure: f64,
    #[serde(default)]
    pub edge_softness: f64,
}

fn default_width() -> f64 {
    2.0
}

fn default_peak() -> f64 {
    1.0
}

impl Phantom {
    pub fn new(shape: Shape, center_row: f64, center_col: f64, scale: f64) -> Self {
        Self {
            shape,
            center_row,
            center_col,
            scale,
            width: default_width(),
            rotation_deg: 0.0,
            peak_pressure: default_peak(),
            edge_softness: 0.0,
        }
    }

    pub fn with_softness(mut self, softness: f64) -> Self {
        self.edge_softness = softness;
        self
    }

    pub fn with_width(mut self, width: f64) -> Self {
        self.width = width;
        self
    }

    pub fn with_rotation(mut self, deg: f64) -> Self {
        self.rotation_deg = deg;
        self
    }

    pub fn with_peak(mut self, peak: f64) -> Self {
        self.peak_pressure = peak;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.center_row, self.center_col, self.scale, self.width, self.rotation_deg]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::NonFinite("phantom parameters"));
        }
        let scale_ok = match self.shape {
            Shape::Disk => self.scale >= 0.0,
            Shape::Mask { rows, cols, ref cells } => {
                if cells.len() != rows * cols {
                    return Err(Error::DimensionMismatch("mask cells do not match mask shape".into()));
                }
                true
            }
            _ => self.scale > 0.0,
        };
        if !scale_ok {
            return Err(Error::InvalidArgument(format!("phantom scale {}", self.scale)));
        }
        if !(self.width > 0.0) || !(self.peak_pressure >= 0.0) || !(self.edge_softness >= 0.0) {
            return Err(Error::InvalidArgument("phantom width, peak and softness must be valid".into()));
        }
        Ok(())
    }

    /// Signed distance (pixels) from a point to the shape boundary, negative inside.
    fn signed_distance(&self, row: f64, col: f64, d_row: f64, d_col: f64) -> f64 {
        let (cr, cc) = (self.center_row + d_row, self.center_col + d_col);
        // Local frame: x along the rotated +col axis, y along the rotated "up".
        let (ex, ey) = (col - cc, cr - row);
        let th = self.rotation_deg.to_radians();
        let (s, c) = th.sin_cos();
        let x = ex * c + ey * s;
        let y = -ex * s + ey * c;
        let half_w = self.width / 2.0;
        match &self.shape {
            Shape::Disk => x.hypot(y) - self.scale,
            Shape::Square => box_sd(x, y, self.scale / 2.0, self.scale / 2.0),
            Shape::Line => segment_sd(x, y, self.scale / 2.0) - half_w,
            Shape::Cross => {
                let r = std::f64::consts::FRAC_1_SQRT_2;
                let (a, b) = (r * (x + y), r * (y - x));
                let l = self.scale / 2.0;
                (segment_sd(a, b, l)).min(segment_sd(b, a, l)) - half_w
            }
            Shape::Ring => (x.hypot(y) - self.scale).abs() - half_w,
            Shape::TwoDisks => {
                let off = self.scale / 2.0;
                ((x - off).hypot(y)).min((x + off).hypot(y)) - self.width
            }
            Shape::ThreeLines => {
                let gap = 2.5 * self.width;
                [-gap, 0.0, gap]
                    .iter()
                    .map(|dy| segment_sd(x, y - dy, self.scale / 2.0) - half_w)
                    .fold(f64::INFINITY, f64::min)
            }
            Shape::Triangle => {
                // Intersection of three half-planes with inradius scale / 2.
                let inradius = self.scale / 2.0;
                (0..3)
                    .map(|k| {
                        let a = std::f64::consts::FRAC_PI_2 + k as f64 * 2.0 * std::f64::consts::PI / 3.0;
                        -(x * a.cos() + y * a.sin()) - inradius
                    })
                    .fold(f64::NEG_INFINITY, f64::max)
            }
            Shape::Mask { rows, cols, cells } => {
                let mut best = f64::INFINITY;
                for mr in 0..*rows {
                    for mc in 0..*cols {
                        if cells[mr * cols + mc] {
                            let pr = cr + mr as f64 - (*rows as f64 - 1.0) / 2.0;
                            let pc = cc + mc as f64 - (*cols as f64 - 1.0) / 2.0;
                            let d = box_sd(col - pc, row - pr, 0.5, 0.5);
                            best = best.min(d);
                        }
                    }
                }
                best
            }
        }
    }

    /// Pressure at pixel `(row, col)` with the phantom shifted by `(d_row, d_col)`.
    pub fn pressure_at(&self, row: usize, col: usize, d_row: f64, d_col: f64) -> f64 {
        if matches!(self.shape, Shape::Disk) && self.scale == 0.0 {
            let hit = (self.center_row + d_row).round() == row as f64
                && (self.center_col + d_col).round() == col as f64;
            return if hit { self.peak_pressure } else { 0.0 };
        }
        let sd = self.signed_distance(row as f64, col as f64, d_row, d_col);
        if sd <= 0.0 {
            self.peak_pressure
        } else if self.edge_softness > 0.0 && sd < self.edge_softness {
            self.peak_pressure * (1.0 - sd / self.edge_softness)
        } else {
            0.0
        }
    }
}

fn box_sd(x: f64, y: f64, hx: f64, hy: f64) -> f64 {
    let (qx, qy) = (x.abs() - hx, y.abs() - hy);
    qx.max(0.0).hypot(qy.max(0.0)) + qx.max(qy).min(0.0)
}

/// Distance from `(x, y)` to the segment `[-half, half] x {0}`.
fn segment_sd(x: f64, y: f64, half: f64) -> f64 {
    let dx = (x.abs() - half).max(0.0);
    dx.hypot(y)
}

/// Renders a static phantom.
pub fn render_phantom(phantom: &Phantom, rows: usize, cols: usize) -> Result<TactileFrame> {
    phantom.validate()?;
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidArgument("empty sensor".into()));
    }
    let values = (0..rows * cols)
        .map(|i| {
            let p = PixelIndex::from_linear(i, cols);
            phantom.pressure_at(p.row, p.col, 0.0, 0.0)
        })
        .collect();
    TactileFrame::new(rows, cols, values, 0)
}

/// How the contact evolves over time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum MotionKind {
    /// Linear load ramp over `ramp_us` after `t0`, then a constant plateau.
    StaticIndent { ramp_us: u64 },
    /// Raised-cosine load pulse lasting `contact_us`.
    Bounce { contact_us: u64 },
    /// Full load for `contact_us` while the footprint slides along `angle_deg`.
    Ricochet { angle_deg: f64, speed_px_per_ms: f64, contact_us: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotionProfile {
    #[serde(flatten)]
    pub kind: MotionKind,
    #[serde(default)]
    pub t0_us: u64,
}

impl MotionProfile {
    pub fn new(kind: MotionKind, t0_us: u64) -> Self {
        Self { kind, t0_us }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            MotionKind::StaticIndent { .. } => Ok(()),
            MotionKind::Bounce { contact_us } | MotionKind::Ricochet { contact_us, .. } if contact_us == 0 => {
                Err(Error::InvalidArgument("contact duration must be positive".into()))
            }
            MotionKind::Ricochet { angle_deg, speed_px_per_ms, .. }
                if !angle_deg.is_finite() || !speed_px_per_ms.is_finite() =>
            {
                Err(Error::NonFinite("ricochet parameters"))
            }
            _ => Ok(()),
        }
    }

    /// Load multiplier in `[0, 1]` at time `t_us`.
    pub fn amplitude(&self, t_us: f64) -> f64 {
        let t0 = self.t0_us as f64;
        if t_us < t0 {
            return 0.0;
        }
        let dt = t_us - t0;
        match self.kind {
            MotionKind::StaticIndent { ramp_us } => {
                if ramp_us == 0 {
                    1.0
                } else {
                    (dt / ramp_us as f64).min(1.0)
                }
            }
            MotionKind::Bounce { contact_us } => {
                let c = contact_us as f64;
                if dt > c {
                    0.0
                } else {
                    0.5 * (1.0 - (2.0 * std::f64::consts::PI * dt / c).cos())
                }
            }
            MotionKind::Ricochet { contact_us, .. } => {
                if dt < contact_us as f64 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Footprint offset `(d_row, d_col)` at time `t_us`.
    pub fn displacement(&self, t_us: f64) -> (f64, f64) {
        match self.kind {
            MotionKind::Ricochet { angle_deg, speed_px_per_ms, contact_us } => {
                let dt = (t_us - self.t0_us as f64).clamp(0.0, contact_us as f64);
                let dist = speed_px_per_ms * dt / 1000.0;
                let (s, c) = angle_deg.to_radians().sin_cos();
                (-dist * s, dist * c)
            }
            _ => (0.0, 0.0),
        }
    }

    /// End of the active phase; static indents never end.
    pub fn contact_end_us(&self) -> Option<u64> {
        match self.kind {
            MotionKind::StaticIndent { .. } => None,
            MotionKind::Bounce { contact_us } | MotionKind::Ricochet { contact_us, .. } => {
                Some(self.t0_us + contact_us)
            }
        }
    }
}

/// A phantom driven by a motion profile, queried pixel by pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneSource {
    phantom: Phantom,
    motion: MotionProfile,
    rows: usize,
    cols: usize,
    duration_us: u64,
    noise: Option<(f64, u64)>,
}

impl SceneSource {
    /// Scene lasting until `t0` plus twice the contact (or `t0 + 1 s` for static indents).
    pub fn new(phantom: Phantom, motion: MotionProfile, rows: usize, cols: usize) -> Result<Self> {
        phantom.validate()?;
        motion.validate()?;
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidArgument("empty sensor".into()));
        }
        let duration_us = match motion.contact_end_us() {
            Some(end) => end + (end - motion.t0_us),
            None => motion.t0_us + 1_000_000,
        };
        Ok(Self { phantom, motion, rows, cols, duration_us, noise: None })
    }

    pub fn with_duration(mut self, duration_us: u64) -> Self {
        self.duration_us = duration_us;
        self
    }

    /// Adds uniform noise in `[0, amplitude)`, a pure function of `(pixel, t, seed)`.
    pub fn with_noise(mut self, amplitude: f64, seed: u64) -> Self {
        self.noise = (amplitude > 0.0).then_some((amplitude, seed));
        self
    }

    pub fn phantom(&self) -> &Phantom {
        &self.phantom
    }

    pub fn motion(&self) -> &MotionProfile {
        &self.motion
    }

    /// Dense frames every `frame_us` from 0 through the scene duration.
    pub fn render_stream(&self, frame_us: u64) -> Result<Vec<TactileFrame>> {
        if frame_us == 0 {
            return Err(Error::InvalidArgument("frame period must be positive".into()));
        }
        Ok((0..=self.duration_us).step_by(frame_us as usize).map(|t| self.snapshot(t)).collect())
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl FrameSource for SceneSource {
    fn rows(&self) -> usize {
        self.rows
    }

    fn cols(&self) -> usize {
        self.cols
    }

    fn read(&self, pixel: PixelIndex, t_us: u64) -> f64 {
        let t = t_us as f64;
        let amp = self.motion.amplitude(t);
        let mut v = if amp > 0.0 {
            let (dr, dc) = self.motion.displacement(t);
            amp * self.phantom.pressure_at(pixel.row, pixel.col, dr, dc)
        } else {
            0.0
        };
        if let Some((a, seed)) = self.noise {
            let h = splitmix64(seed ^ splitmix64(pixel.linear(self.cols) as u64 ^ splitmix64(t_us)));
            v += a * (h >> 11) as f64 / (1u64 << 53) as f64;
        }
        v
    }

    fn duration_us(&self) -> u64 {
        self.duration_us
    }
}

/// Expected number of frames overlapping a contact of `contact_us` when each
/// frame costs `measurements` reads at `sample_rate_hz`.
pub fn expected_contact_frames(contact_us: f64, measurements: usize, sample_rate_hz: f64) -> f64 {
    contact_us / (measurements as f64 / sample_rate_hz * 1e6)
}

/// Ten distinct footprints centered on a `rows x cols` sensor, used as a
/// synthetic object library. Returns `(name, phantom)` pairs.
pub fn standard_phantoms(rows: usize, cols: usize) -> Vec<(&'static str, Phantom)> {
    let (cr, cc) = ((rows as f64 - 1.0) / 2.0, (cols as f64 - 1.0) / 2.0);
    let s = rows.min(cols) as f64 / 32.0;
    let soft = 1.0;
    vec![
        ("small-disk", Phantom::new(Shape::Disk, cr, cc, 2.5 * s)),
        ("circle", Phantom::new(Shape::Disk, cr, cc, 6.5 * s)),
        ("square", Phantom::new(Shape::Square, cr, cc, 10.0 * s)),
        ("x", Phantom::new(Shape::Cross, cr, cc, 16.0 * s).with_width(2.0 * s)),
        ("line", Phantom::new(Shape::Line, cr, cc, 16.0 * s).with_width(2.0 * s)),
        ("diagonal-line", Phantom::new(Shape::Line, cr, cc, 16.0 * s).with_width(2.0 * s).with_rotation(45.0)),
        ("ring", Phantom::new(Shape::Ring, cr, cc, 6.5 * s).with_width(2.0 * s)),
        ("two-cylinders", Phantom::new(Shape::TwoDisks, cr, cc, 12.0 * s).with_width(3.0 * s)),
        ("three-lines", Phantom::new(Shape::ThreeLines, cr, cc, 14.0 * s).with_width(1.6 * s)),
        ("triangle", Phantom::new(Shape::Triangle, cr, cc, 12.0 * s)),
    ]
    .into_iter()
    .map(|(n, p)| (n, p.with_softness(soft)))
    .collect()
}
