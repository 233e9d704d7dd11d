//! Adaptive binary subsampling.
//!
//! The probe order comes from recursive bisection of the (square) array:
//! start at the center, then alternately split the current cells along
//! columns and along rows, emitting each new cell center. Whenever a read
//! exceeds the neighbor-search threshold, the 8-neighborhood of that pixel is
//! read depth-first before the bisection order resumes.

use indexmap::IndexSet;

use crate::error::{Error, Result};
use crate::frame::{Measurement, MeasurementSet, PixelIndex, Scheme};
use crate::source::FrameSource;

use super::clock::MeasurementClock;

/// Visiting order of the 8-neighborhood, as `(d_row, d_col)` offsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NeighborOrder(pub [(i8, i8); 8]);

impl Default for NeighborOrder {
    /// E, S, W, N, SE, SW, NW, NE.
    fn default() -> Self {
        NeighborOrder([(0, 1), (1, 0), (0, -1), (-1, 0), (1, 1), (1, -1), (-1, -1), (-1, 1)])
    }
}

impl NeighborOrder {
    fn neighbors(&self, p: PixelIndex, rows: usize, cols: usize) -> impl Iterator<Item = PixelIndex> + '_ {
        self.0.iter().filter_map(move |&(dr, dc)| {
            let r = p.row as isize + dr as isize;
            let c = p.col as isize + dc as isize;
            (r >= 0 && c >= 0 && (r as usize) < rows && (c as usize) < cols)
                .then(|| PixelIndex::new(r as usize, c as usize))
        })
    }
}

/// Bisection probe order for a square `rows x cols` array: a permutation of
/// all pixels starting at the center.
pub fn build_binary_order(rows: usize, cols: usize) -> Result<Vec<PixelIndex>> {
    if rows != cols {
        return Err(Error::InvalidArgument(format!(
            "binary order needs a square array, got {rows}x{cols}"
        )));
    }
    if rows == 0 {
        return Err(Error::InvalidArgument("empty array".into()));
    }
    let side = rows as i64;
    let n = rows * cols;
    // Work in the 1-based coordinates of the bisection recursion; candidates
    // outside 1..=side are kept as centers but never emitted.
    let center = (side + 1) / 2;
    let mut emitted = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut emit = |x: i64, y: i64, order: &mut Vec<PixelIndex>| {
        if (1..=side).contains(&x) && (1..=side).contains(&y) {
            let p = PixelIndex::new((x - 1) as usize, (y - 1) as usize);
            let idx = p.linear(cols);
            if !emitted[idx] {
                emitted[idx] = true;
                order.push(p);
            }
        }
    };
    emit(center, center, &mut order);

    let mut last: IndexSet<(i64, i64)> = IndexSet::from([(center, center)]);
    let mut horizontal = false;
    let mut distance = center;
    // Bound the set of out-of-grid centers the recursion may carry along.
    let margin = side + 1;
    let keep = |x: i64, y: i64| x > -margin && y > -margin && x <= side + margin && y <= side + margin;
    while order.len() < n {
        let mut current: IndexSet<(i64, i64)> = IndexSet::with_capacity(2 * last.len());
        if horizontal {
            for &(x, y) in &last {
                for cand in [(x - distance, y), (x + distance, y)] {
                    if keep(cand.0, cand.1) {
                        current.insert(cand);
                    }
                    emit(cand.0, cand.1, &mut order);
                }
            }
        } else {
            distance = (distance + 1) / 2;
            for &(x, y) in &last {
                for cand in [(x, y - distance), (x, y + distance)] {
                    if keep(cand.0, cand.1) {
                        current.insert(cand);
                    }
                    emit(cand.0, cand.1, &mut order);
                }
            }
        }
        last = current;
        horizontal = !horizontal;
    }
    Ok(order)
}

/// Runs adaptive binary subsampling for one frame.
///
/// Reads at most `measurements` distinct pixels. Each read advances `clock`
/// by one sample period.
pub fn binary_sample<S: FrameSource + ?Sized>(
    source: &S,
    order: &[PixelIndex],
    measurements: usize,
    ns_thr: f64,
    neighbors: &NeighborOrder,
    clock: &mut MeasurementClock,
) -> Result<MeasurementSet> {
    let (rows, cols) = (source.rows(), source.cols());
    if order.len() != rows * cols {
        return Err(Error::DimensionMismatch(format!(
            "binary order of {} pixels for a {rows}x{cols} source",
            order.len()
        )));
    }
    if ns_thr.is_nan() || ns_thr < 0.0 {
        return Err(Error::InvalidArgument(format!("neighbor threshold {ns_thr}")));
    }
    let budget = measurements.min(rows * cols);
    let mut measured = vec![false; rows * cols];
    let mut out: Vec<Measurement> = Vec::with_capacity(budget);
    let read = |p: PixelIndex, measured: &mut [bool], out: &mut Vec<Measurement>, clock: &mut MeasurementClock| {
        measured[p.linear(cols)] = true;
        let t_us = clock.tick();
        let value = source.read(p, t_us);
        out.push(Measurement { pixel: p, value, t_us });
        value
    };
    // Depth-first neighbor flood: (pixel, next neighbor slot).
    let mut stack: Vec<(PixelIndex, usize)> = Vec::new();

    for &p in order {
        if out.len() >= budget {
            break;
        }
        if measured[p.linear(cols)] {
            continue;
        }
        if read(p, &mut measured, &mut out, clock) > ns_thr {
            stack.push((p, 0));
        }
        while let Some(top) = stack.last_mut() {
            if out.len() >= budget {
                stack.clear();
                break;
            }
            let (center, slot) = *top;
            let next = neighbors
                .neighbors(center, rows, cols)
                .enumerate()
                .skip(slot)
                .find(|(_, q)| !measured[q.linear(cols)]);
            match next {
                Some((k, q)) => {
                    top.1 = k + 1;
                    if read(q, &mut measured, &mut out, clock) > ns_thr {
                        stack.push((q, 0));
                    }
                }
                None => {
                    stack.pop();
                }
            }
        }
    }
    let exhausted = out.len() < measurements.min(rows * cols);
    let mut set = MeasurementSet::new(rows, cols, Scheme::Binary, 0, 0, out)?;
    set.exhausted = exhausted;
    Ok(set)
}
