//! Analytic baseline dictionaries: separable overcomplete DCT and
//! cyclically shifted 2-D Haar.

use std::f64::consts::PI;

use super::Dictionary;
use crate::error::{Error, Result};
use crate::omp::{dot, norm};

/// `n x k` one-dimensional cosine frame: a constant column followed by
/// mean-removed, normalized `cos(pi (i + 1/2) j / k)` columns. For `k = n`
/// these are exactly the orthonormal DCT-II vectors.
fn cosine_frame(n: usize, k: usize) -> Vec<Vec<f64>> {
    (0..k)
        .map(|j| {
            if j == 0 {
                return vec![1.0 / (n as f64).sqrt(); n];
            }
            let mut v: Vec<f64> =
                (0..n).map(|i| (PI * (i as f64 + 0.5) * j as f64 / k as f64).cos()).collect();
            let mean = v.iter().sum::<f64>() / n as f64;
            v.iter_mut().for_each(|x| *x -= mean);
            let nv = norm(&v);
            v.iter_mut().for_each(|x| *x /= nv);
            v
        })
        .collect()
}

/// Separable overcomplete DCT with `K = k^2` atoms, `k >= max(patch_rows, patch_cols)`.
///
/// Atom `a * k + b` is the outer product of row-axis column `a` and
/// column-axis column `b`; atom 0 is the constant patch.
pub fn overcomplete_dct(patch_rows: usize, patch_cols: usize, atom_count: usize) -> Result<Dictionary> {
    let k = (atom_count as f64).sqrt().round() as usize;
    if k * k != atom_count {
        return Err(Error::InvalidArgument(format!("K = {atom_count} is not a perfect square")));
    }
    if k < patch_rows.max(patch_cols) || patch_rows == 0 || patch_cols == 0 {
        return Err(Error::InvalidArgument(format!(
            "sqrt(K) = {k} smaller than patch side {}",
            patch_rows.max(patch_cols)
        )));
    }
    let rows = cosine_frame(patch_rows, k);
    let cols = cosine_frame(patch_cols, k);
    let mut atoms = Vec::with_capacity(atom_count * patch_rows * patch_cols);
    for ra in &rows {
        for cb in &cols {
            for r in ra {
                atoms.extend(cb.iter().map(|c| r * c));
            }
        }
    }
    Dictionary::from_unnormalized(patch_rows, patch_cols, atoms)
}

fn haar_1d(width: usize, wavelet: bool) -> Vec<f64> {
    let a = 1.0 / (width as f64).sqrt();
    (0..width).map(|i| if wavelet && i >= width / 2 { -a } else { a }).collect()
}

/// Places `profile_r x profile_c` (outer product) at `(r0, c0)` with cyclic wrap.
fn place(side: usize, pr: &[f64], pc: &[f64], r0: usize, c0: usize) -> Vec<f64> {
    let mut atom = vec![0.0; side * side];
    for (i, a) in pr.iter().enumerate() {
        for (j, b) in pc.iter().enumerate() {
            atom[((r0 + i) % side) * side + (c0 + j) % side] = a * b;
        }
    }
    atom
}

/// Overcomplete 2-D Haar dictionary on square power-of-two patches.
///
/// Contains the scaling functions at `max_level` and the three wavelet
/// orientations at every level `1..=max_level`. A level-`l` atom (support
/// `2^l`) is translated cyclically in steps of `max(1, 2^l * shift_step / side)`,
/// so `shift_step = side` gives the orthonormal Haar basis and smaller
/// steps add shifted copies. Atoms equal up to sign are kept once.
pub fn overcomplete_haar(
    patch_rows: usize,
    patch_cols: usize,
    shift_step: usize,
    max_level: usize,
) -> Result<Dictionary> {
    if patch_rows != patch_cols || !patch_rows.is_power_of_two() {
        return Err(Error::InvalidArgument(format!(
            "Haar dictionary needs a square power-of-two patch, got {patch_rows}x{patch_cols}"
        )));
    }
    let side = patch_rows;
    let levels = side.trailing_zeros() as usize;
    if max_level == 0 || max_level > levels {
        return Err(Error::InvalidArgument(format!("max_level {max_level} outside [1, {levels}]")));
    }
    if shift_step == 0 || shift_step > side || !shift_step.is_power_of_two() {
        return Err(Error::InvalidArgument(format!("shift_step {shift_step} must be a power of two <= {side}")));
    }
    let step_for = |width: usize| (width * shift_step / side).max(1);

    let mut candidates: Vec<Vec<f64>> = Vec::new();
    let coarse = 1usize << max_level;
    let phi = haar_1d(coarse, false);
    let t = step_for(coarse);
    for r0 in (0..side).step_by(t) {
        for c0 in (0..side).step_by(t) {
            candidates.push(place(side, &phi, &phi, r0, c0));
        }
    }
    for level in (1..=max_level).rev() {
        let w = 1usize << level;
        let (phi, psi) = (haar_1d(w, false), haar_1d(w, true));
        let t = step_for(w);
        for (pr, pc) in [(&phi, &psi), (&psi, &phi), (&psi, &psi)] {
            for r0 in (0..side).step_by(t) {
                for c0 in (0..side).step_by(t) {
                    candidates.push(place(side, pr, pc, r0, c0));
                }
            }
        }
    }

    let mut kept: Vec<Vec<f64>> = Vec::new();
    for c in candidates {
        if !kept.iter().any(|k| dot(k, &c).abs() >= 1.0 - 1e-9) {
            kept.push(c);
        }
    }
    Dictionary::from_unnormalized(side, side, kept.concat())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gram_is_identity(d: &Dictionary, tol: f64) -> bool {
        let k = d.atom_count();
        (0..k).all(|i| {
            (0..k).all(|j| {
                let expect = if i == j { 1.0 } else { 0.0 };
                (dot(d.atom(i), d.atom(j)) - expect).abs() <= tol
            })
        })
    }

    #[test]
    fn dct_with_k_equal_side_is_orthonormal() {
        let d = overcomplete_dct(8, 8, 64).unwrap();
        assert!(gram_is_identity(&d, 1e-8));
        let d = overcomplete_dct(4, 4, 16).unwrap();
        assert!(gram_is_identity(&d, 1e-8));
    }

    #[test]
    fn overcomplete_dct_shape() {
        let d = overcomplete_dct(8, 8, 100).unwrap();
        assert_eq!(d.atom_count(), 100);
        assert_eq!(d.patch_len(), 64);
        let dc = d.atom(0);
        assert!(dc.iter().all(|v| (v - 0.125).abs() < 1e-12));
        for atom in d.atoms().skip(1) {
            assert!(atom.iter().sum::<f64>().abs() < 1e-9);
        }
    }

    #[test]
    fn dct_rejects_bad_k() {
        assert!(overcomplete_dct(8, 8, 99).is_err());
        assert!(overcomplete_dct(8, 8, 49).is_err());
    }

    #[test]
    fn haar_basis_is_orthonormal() {
        let d = overcomplete_haar(8, 8, 8, 3).unwrap();
        assert_eq!(d.atom_count(), 64);
        assert!(gram_is_identity(&d, 1e-12));
        let d = overcomplete_haar(8, 8, 8, 2).unwrap();
        assert_eq!(d.atom_count(), 64);
        assert!(gram_is_identity(&d, 1e-12));
    }

    #[test]
    fn shifted_haar_is_overcomplete_and_zero_mean() {
        let d = overcomplete_haar(8, 8, 4, 3).unwrap();
        assert!(d.atom_count() > 64);
        for atom in d.atoms().skip(1) {
            assert!(atom.iter().sum::<f64>().abs() < 1e-9);
        }
    }

    #[test]
    fn haar_rejects_bad_sides() {
        assert!(overcomplete_haar(6, 6, 6, 1).is_err());
        assert!(overcomplete_haar(8, 8, 3, 3).is_err());
        assert!(overcomplete_haar(8, 8, 8, 4).is_err());
    }
}
