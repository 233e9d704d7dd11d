//! Non-adaptive sampling plans: rotating uniform lattice and seeded random.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::frame::PixelIndex;

/// Smallest stride `s` with `s^2 * m >= n`, i.e. `ceil(sqrt(n / m))`.
pub fn uniform_stride(n: usize, m: usize) -> usize {
    let mut s = ((n as f64 / m as f64).sqrt().ceil() as usize).max(1);
    while s > 1 && (s - 1) * (s - 1) * m >= n {
        s -= 1;
    }
    while s * s * m < n {
        s += 1;
    }
    s
}

/// Every pixel, grouped by lattice phase: phase `(pr, pc)` in row-major phase
/// order, and within a phase the lattice points `(pr + i*s, pc + j*s)` in
/// row-major order.
fn phase_sequence(rows: usize, cols: usize, stride: usize) -> Vec<PixelIndex> {
    let mut seq = Vec::with_capacity(rows * cols);
    for pr in 0..stride.min(rows) {
        for pc in 0..stride.min(cols) {
            for r in (pr..rows).step_by(stride) {
                for c in (pc..cols).step_by(stride) {
                    seq.push(PixelIndex::new(r, c));
                }
            }
        }
    }
    seq
}

/// Uniform lattice plan for `frame_index`.
///
/// The lattice has stride `ceil(sqrt(N/M))` in both axes; consecutive frames
/// walk through the lattice phases, so any `ceil(N/M)` consecutive plans
/// cover every pixel. Frame `f` takes the `M` entries of the phase sequence
/// starting at `f*M` (cyclically), which is the row-major truncation of a
/// single phase whenever one phase holds at least `M` points.
pub fn uniform_plan(rows: usize, cols: usize, m: usize, frame_index: u64) -> Result<Vec<PixelIndex>> {
    let n = rows * cols;
    if m == 0 || m > n {
        return Err(Error::InvalidArgument(format!("uniform plan with M = {m} on {n} pixels")));
    }
    let seq = phase_sequence(rows, cols, uniform_stride(n, m));
    let start = ((frame_index as u128 * m as u128) % n as u128) as usize;
    Ok((0..m).map(|k| seq[(start + k) % n]).collect())
}

/// `M` distinct pixels drawn without replacement.
///
/// The generator is ChaCha8 keyed by `seed` with `frame_index` as the stream
/// id, so every frame's plan is reproducible on its own.
pub fn random_plan(rows: usize, cols: usize, m: usize, seed: u64, frame_index: u64) -> Result<Vec<PixelIndex>> {
    let n = rows * cols;
    if m > n {
        return Err(Error::InvalidArgument(format!("random plan with M = {m} on {n} pixels")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(frame_index);
    Ok(rand::seq::index::sample(&mut rng, n, m)
        .into_iter()
        .map(|i| PixelIndex::from_linear(i, cols))
        .collect())
}

/// All pixels in raster order.
pub fn raster_plan(rows: usize, cols: usize) -> Vec<PixelIndex> {
    (0..rows * cols).map(|i| PixelIndex::from_linear(i, cols)).collect()
}
