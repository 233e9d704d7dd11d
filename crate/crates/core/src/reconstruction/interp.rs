//! Piecewise-linear interpolation baseline over a Delaunay triangulation of
//! the measured pixels, with linear extrapolation outside the convex hull.

use spade::handles::{FixedFaceHandle, InnerTag};
use spade::{DelaunayTriangulation, HasPosition, Point2, PositionInTriangulation, Triangulation};

use crate::error::{Error, Result};
use crate::frame::{MeasurementSet, PixelIndex};

#[derive(Debug, Clone, Copy)]
struct Sample {
    pos: Point2<f64>,
    value: f64,
}

impl HasPosition for Sample {
    type Scalar = f64;

    fn position(&self) -> Point2<f64> {
        self.pos
    }
}

/// Value at `q` of the plane through the three vertices of a face.
fn plane_at(tri: &DelaunayTriangulation<Sample>, face: FixedFaceHandle<InnerTag>, q: Point2<f64>) -> f64 {
    let [a, b, c] = tri.face(face).vertices().map(|v| *v.data());
    let (ux, uy) = (b.pos.x - a.pos.x, b.pos.y - a.pos.y);
    let (vx, vy) = (c.pos.x - a.pos.x, c.pos.y - a.pos.y);
    let (wx, wy) = (q.x - a.pos.x, q.y - a.pos.y);
    let det = ux * vy - uy * vx;
    let l1 = (wx * vy - wy * vx) / det;
    let l2 = (ux * wy - uy * wx) / det;
    a.value + l1 * (b.value - a.value) + l2 * (c.value - a.value)
}

fn segment_distance_sq(p: Point2<f64>, a: Point2<f64>, b: Point2<f64>) -> f64 {
    let (dx, dy) = (b.x - a.x, b.y - a.y);
    let len_sq = dx * dx + dy * dy;
    let t = if len_sq == 0.0 { 0.0 } else { (((p.x - a.x) * dx + (p.y - a.y) * dy) / len_sq).clamp(0.0, 1.0) };
    let (cx, cy) = (a.x + t * dx - p.x, a.y + t * dy - p.y);
    cx * cx + cy * cy
}

fn nearest_fill(samples: &[Sample], rows: usize, cols: usize) -> Vec<f64> {
    (0..rows * cols)
        .map(|i| {
            let p = PixelIndex::from_linear(i, cols);
            let (x, y) = (p.col as f64, p.row as f64);
            let mut best = (f64::INFINITY, 0.0);
            for s in samples {
                let d = (s.pos.x - x).powi(2) + (s.pos.y - y).powi(2);
                if d < best.0 {
                    best = (d, s.value);
                }
            }
            best.1
        })
        .collect()
}

/// Linear interpolation of the measured values onto the full grid.
///
/// Pixels outside the convex hull of the measured points take the value of
/// the plane of the hull triangle adjacent to the nearest hull edge. With
/// fewer than three points, or when all points are collinear, every pixel
/// takes the value of its nearest measured point.
///
/// Returned values may be negative (extrapolation); callers clamp as needed.
pub fn interpolate_values(meas: &MeasurementSet, rows: usize, cols: usize) -> Result<Vec<f64>> {
    if meas.is_empty() {
        return Err(Error::Empty("measurement set"));
    }
    if meas.rows != rows || meas.cols != cols {
        return Err(Error::DimensionMismatch(format!(
            "measurements are {}x{}, target is {rows}x{cols}",
            meas.rows, meas.cols
        )));
    }
    let samples: Vec<Sample> = meas
        .measurements()
        .iter()
        .map(|m| Sample { pos: Point2::new(m.pixel.col as f64, m.pixel.row as f64), value: m.value })
        .collect();
    if samples.len() < 3 {
        return Ok(nearest_fill(&samples, rows, cols));
    }
    let mut tri = DelaunayTriangulation::<Sample>::new();
    for s in &samples {
        tri.insert(*s).map_err(|e| Error::Numeric(format!("triangulation failed: {e:?}")))?;
    }
    if tri.num_inner_faces() == 0 {
        return Ok(nearest_fill(&samples, rows, cols));
    }

    // Hull edges with the inner face on their other side.
    let hull: Vec<(Point2<f64>, Point2<f64>, FixedFaceHandle<InnerTag>)> = tri
        .convex_hull()
        .filter_map(|e| {
            let inner = e.rev().face().as_inner()?.fix();
            Some((e.from().position(), e.to().position(), inner))
        })
        .collect();

    let mut out = Vec::with_capacity(rows * cols);
    for i in 0..rows * cols {
        let p = PixelIndex::from_linear(i, cols);
        let q = Point2::new(p.col as f64, p.row as f64);
        let v = match tri.locate(q) {
            PositionInTriangulation::OnVertex(v) => tri.vertex(v).data().value,
            PositionInTriangulation::OnFace(f) => plane_at(&tri, f, q),
            PositionInTriangulation::OnEdge(e) => {
                let edge = tri.directed_edge(e);
                let face = edge.face().as_inner().or_else(|| edge.rev().face().as_inner());
                match face {
                    Some(f) => plane_at(&tri, f.fix(), q),
                    None => return Err(Error::Numeric("edge without an inner face".into())),
                }
            }
            PositionInTriangulation::OutsideOfConvexHull(_) => {
                let mut best: Option<(f64, FixedFaceHandle<InnerTag>)> = None;
                for &(a, b, f) in &hull {
                    let d = segment_distance_sq(q, a, b);
                    if best.is_none_or(|(bd, _)| d < bd) {
                        best = Some((d, f));
                    }
                }
                let (_, f) = best.ok_or_else(|| Error::Numeric("empty convex hull".into()))?;
                plane_at(&tri, f, q)
            }
            PositionInTriangulation::NoTriangulation => {
                return Ok(nearest_fill(&samples, rows, cols));
            }
        };
        out.push(v);
    }
    Ok(out)
}
