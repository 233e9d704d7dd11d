//! Frame- and stream-level metrics.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::frame::{PixelIndex, TactileFrame};

/// Default activity threshold as a fraction of the reference frame's maximum.
pub const DEFAULT_THRESHOLD_FRACTION: f64 = 0.1;

fn check_shape(a: &TactileFrame, b: &TactileFrame) -> Result<()> {
    if a.same_shape(b) {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )))
    }
}

/// Fraction of pixels on which the two frames agree after binarizing both at
/// `thr` (`value > thr` counts as active).
pub fn support_accuracy(recon: &TactileFrame, truth: &TactileFrame, thr: f64) -> Result<f64> {
    check_shape(recon, truth)?;
    let agree = recon
        .values()
        .iter()
        .zip(truth.values())
        .filter(|(a, b)| (**a > thr) == (**b > thr))
        .count();
    Ok(agree as f64 / truth.len() as f64)
}

/// Intersection over union of the two active sets; 1 when both are empty.
pub fn support_iou(recon: &TactileFrame, truth: &TactileFrame, thr: f64) -> Result<f64> {
    check_shape(recon, truth)?;
    let (mut inter, mut union) = (0usize, 0usize);
    for (a, b) in recon.values().iter().zip(truth.values()) {
        let (a, b) = (*a > thr, *b > thr);
        inter += (a && b) as usize;
        union += (a || b) as usize;
    }
    Ok(if union == 0 { 1.0 } else { inter as f64 / union as f64 })
}

/// Center of pressure of one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CopSample {
    pub t_us: u64,
    pub row: f64,
    pub col: f64,
    pub total_force: f64,
}

/// Force-weighted mean pixel position. Fails on a frame with no load.
pub fn center_of_pressure(frame: &TactileFrame) -> Result<CopSample> {
    let total = frame.total();
    if !(total > 0.0) {
        return Err(Error::InvalidArgument("center of pressure of an unloaded frame".into()));
    }
    let (mut r, mut c) = (0.0, 0.0);
    for (i, &v) in frame.values().iter().enumerate() {
        let p = PixelIndex::from_linear(i, frame.cols());
        r += v * p.row as f64;
        c += v * p.col as f64;
    }
    Ok(CopSample { t_us: frame.timestamp_us, row: r / total, col: c / total, total_force: total })
}

/// Direction of the net COP displacement, first to last sample, in degrees
/// counter-clockwise from +col with rows growing downward. Range `(-180, 180]`.
pub fn ricochet_angle(cops: &[CopSample]) -> Result<f64> {
    let (Some(first), Some(last)) = (cops.first(), cops.last()) else {
        return Err(Error::InvalidArgument("need at least two COP samples".into()));
    };
    if cops.len() < 2 {
        return Err(Error::InvalidArgument("need at least two COP samples".into()));
    }
    let d_up = first.row - last.row;
    let d_right = last.col - first.col;
    if d_up == 0.0 && d_right == 0.0 {
        return Err(Error::InvalidArgument("zero COP displacement".into()));
    }
    let deg = d_up.atan2(d_right).to_degrees();
    Ok(if deg <= -180.0 { 180.0 } else { deg })
}

/// Number of frames with at least one value above `thr`.
pub fn contact_frame_count(frames: &[TactileFrame], thr: f64) -> usize {
    frames.iter().filter(|f| f.values().iter().any(|&v| v > thr)).count()
}

/// Mean absolute change in total force between consecutive frames.
pub fn force_smoothness(frames: &[TactileFrame]) -> Result<f64> {
    if frames.len() < 2 {
        return Err(Error::InvalidArgument("need at least two frames".into()));
    }
    let totals: Vec<f64> = frames.iter().map(TactileFrame::total).collect();
    Ok(totals.windows(2).map(|w| (w[1] - w[0]).abs()).sum::<f64>() / (totals.len() - 1) as f64)
}

/// Active pixels (`> thr`) that touch an inactive 4-neighbor or the border.
pub fn outline(frame: &TactileFrame, thr: f64) -> BTreeSet<PixelIndex> {
    let (rows, cols) = (frame.rows(), frame.cols());
    let active = |r: usize, c: usize| frame.get(PixelIndex::new(r, c)) > thr;
    let mut out = BTreeSet::new();
    for r in 0..rows {
        for c in 0..cols {
            if !active(r, c) {
                continue;
            }
            let boundary = r == 0
                || c == 0
                || r + 1 == rows
                || c + 1 == cols
                || !active(r - 1, c)
                || !active(r + 1, c)
                || !active(r, c - 1)
                || !active(r, c + 1);
            if boundary {
                out.insert(PixelIndex::new(r, c));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{render_phantom, Phantom, Shape};

    fn frame(rows: usize, cols: usize, on: &[(usize, usize)]) -> TactileFrame {
        let mut v = vec![0.0; rows * cols];
        for &(r, c) in on {
            v[r * cols + c] = 1.0;
        }
        TactileFrame::new(rows, cols, v, 0).unwrap()
    }

    #[test]
    fn support_accuracy_examples() {
        let truth_px: Vec<_> = (0..64).map(|i| (i / 8, i % 8)).collect();
        let truth = frame(32, 32, &truth_px);
        assert_eq!(support_accuracy(&truth, &truth, 0.5).unwrap(), 1.0);
        let comp: Vec<f64> = truth.values().iter().map(|v| 1.0 - v).collect();
        let comp = TactileFrame::new(32, 32, comp, 0).unwrap();
        assert_eq!(support_accuracy(&comp, &truth, 0.5).unwrap(), 0.0);
        // 60 hits, 4 misses, 4 false positives elsewhere.
        let mut rec_px: Vec<_> = truth_px[..60].to_vec();
        rec_px.extend([(20, 20), (20, 21), (21, 20), (21, 21)]);
        let rec = frame(32, 32, &rec_px);
        let expected = (60.0 + (1024.0 - 64.0 - 4.0)) / 1024.0;
        assert!((support_accuracy(&rec, &truth, 0.5).unwrap() - expected).abs() < 1e-12);
        assert!((expected - 0.9922).abs() < 1e-4);
        assert!((support_iou(&rec, &truth, 0.5).unwrap() - 60.0 / 68.0).abs() < 1e-12);
        assert!(support_accuracy(&rec, &frame(4, 4, &[]), 0.5).is_err());
    }

    #[test]
    fn cop_examples() {
        let c = center_of_pressure(&frame(5, 5, &[(3, 1)])).unwrap();
        assert_eq!((c.row, c.col), (3.0, 1.0));
        let c = center_of_pressure(&frame(3, 3, &[(0, 0), (0, 2)])).unwrap();
        assert_eq!((c.row, c.col), (0.0, 1.0));
        let c = center_of_pressure(&TactileFrame::new(4, 6, vec![2.0; 24], 0).unwrap()).unwrap();
        assert_eq!((c.row, c.col), (1.5, 2.5));
        assert!(center_of_pressure(&frame(3, 3, &[])).is_err());
    }

    fn cop(row: f64, col: f64) -> CopSample {
        CopSample { t_us: 0, row, col, total_force: 1.0 }
    }

    #[test]
    fn ricochet_angle_examples() {
        assert_eq!(ricochet_angle(&[cop(5.0, 1.0), cop(5.0, 2.0), cop(5.0, 4.0)]).unwrap(), 0.0);
        assert!((ricochet_angle(&[cop(5.0, 5.0), cop(4.0, 6.0)]).unwrap() - 45.0).abs() < 1e-12);
        assert_eq!(ricochet_angle(&[cop(5.0, 5.0), cop(5.0, 3.0)]).unwrap(), 180.0);
        assert!((ricochet_angle(&[cop(5.0, 5.0), cop(6.0, 5.0)]).unwrap() + 90.0).abs() < 1e-12);
        assert!(ricochet_angle(&[cop(1.0, 1.0)]).is_err());
        assert!(ricochet_angle(&[cop(1.0, 1.0), cop(1.0, 1.0)]).is_err());
    }

    #[test]
    fn contact_counts_and_smoothness() {
        let zero = frame(2, 2, &[]);
        let one = frame(2, 2, &[(0, 0)]);
        assert_eq!(contact_frame_count(&[zero.clone(), zero.clone()], 0.5), 0);
        assert_eq!(contact_frame_count(&[one.clone(), one.clone()], 0.5), 2);
        assert_eq!(force_smoothness(&[one.clone(), one.clone(), one.clone()]).unwrap(), 0.0);
        let ten = TactileFrame::new(2, 2, vec![2.5; 4], 0).unwrap();
        let alt = [zero.clone(), ten.clone(), zero.clone(), ten];
        assert_eq!(force_smoothness(&alt).unwrap(), 10.0);
        assert!(force_smoothness(&[zero]).is_err());
    }

    #[test]
    fn outline_examples() {
        let single = frame(5, 5, &[(2, 2)]);
        assert_eq!(outline(&single, 0.5).into_iter().collect::<Vec<_>>(), vec![PixelIndex::new(2, 2)]);
        let block: Vec<_> = (1..4).flat_map(|r| (1..4).map(move |c| (r, c))).collect();
        let o = outline(&frame(5, 5, &block), 0.5);
        assert_eq!(o.len(), 8);
        assert!(!o.contains(&PixelIndex::new(2, 2)));
    }

    #[test]
    fn disk_outline_tracks_circumference() {
        let r = 5.0;
        let f = render_phantom(&Phantom::new(Shape::Disk, 16.0, 16.0, r), 32, 32).unwrap();
        let n = outline(&f, 0.5).len() as f64;
        let perimeter = 2.0 * std::f64::consts::PI * r;
        assert!((n - perimeter).abs() <= 0.2 * perimeter, "{n} vs {perimeter}");
    }
}
