//! Patch dictionaries: the learned K-SVD dictionary and analytic baselines.

mod analytic;
mod ksvd;
mod patches;

pub use analytic::{overcomplete_dct, overcomplete_haar};
pub use ksvd::{ksvd_train, KsvdIteration, KsvdParams, KsvdReport};
pub use patches::{coherence, extract_patches, prune_coherent, PatchExtraction, PatchSet};

use crate::error::{Error, Result};
use crate::omp::{axpy, norm, LinearOperator, SparseCode};

/// Tolerance on atom norms.
pub const UNIT_NORM_TOL: f64 = 1e-6;

/// `K` unit-norm atoms over `patch_rows x patch_cols` patches.
///
/// Atoms are stored contiguously; each atom is a row-major patch.
#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary {
    patch_rows: usize,
    patch_cols: usize,
    atoms: Vec<f64>,
}

impl Dictionary {
    /// Wraps atom data, checking that every atom has unit norm.
    pub fn new(patch_rows: usize, patch_cols: usize, atoms: Vec<f64>) -> Result<Self> {
        let d = patch_rows * patch_cols;
        if d == 0 {
            return Err(Error::InvalidArgument("empty patch shape".into()));
        }
        if atoms.is_empty() || !atoms.len().is_multiple_of(d) {
            return Err(Error::DimensionMismatch(format!(
                "{} values do not form whole {patch_rows}x{patch_cols} atoms",
                atoms.len()
            )));
        }
        if atoms.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("dictionary atoms"));
        }
        for (k, atom) in atoms.chunks_exact(d).enumerate() {
            let n = norm(atom);
            if (n - 1.0).abs() > UNIT_NORM_TOL {
                return Err(Error::InvalidArgument(format!("atom {k} has norm {n}")));
            }
        }
        Ok(Self { patch_rows, patch_cols, atoms })
    }

    /// Normalizes every atom before wrapping; zero atoms are rejected.
    pub fn from_unnormalized(patch_rows: usize, patch_cols: usize, mut atoms: Vec<f64>) -> Result<Self> {
        let d = patch_rows * patch_cols;
        if d == 0 || !atoms.len().is_multiple_of(d) {
            return Err(Error::DimensionMismatch("atom data does not match patch shape".into()));
        }
        for (k, atom) in atoms.chunks_exact_mut(d).enumerate() {
            let n = norm(atom);
            if n == 0.0 || !n.is_finite() {
                return Err(Error::InvalidArgument(format!("atom {k} cannot be normalized")));
            }
            atom.iter_mut().for_each(|v| *v /= n);
        }
        Self::new(patch_rows, patch_cols, atoms)
    }

    pub fn patch_rows(&self) -> usize {
        self.patch_rows
    }

    pub fn patch_cols(&self) -> usize {
        self.patch_cols
    }

    /// Length of one atom.
    pub fn patch_len(&self) -> usize {
        self.patch_rows * self.patch_cols
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len() / self.patch_len()
    }

    pub fn atom(&self, k: usize) -> &[f64] {
        let d = self.patch_len();
        &self.atoms[k * d..(k + 1) * d]
    }

    pub fn atoms(&self) -> impl Iterator<Item = &[f64]> {
        self.atoms.chunks_exact(self.patch_len())
    }

    pub fn raw(&self) -> &[f64] {
        &self.atoms
    }

    /// The full dictionary as a `patch_len x K` operator.
    pub fn operator(&self) -> LinearOperator {
        LinearOperator::from_columns(self.patch_len(), self.atom_count(), self.atoms.clone())
            .expect("dictionary data is valid")
    }

    /// Operator made of the dictionary rows at the given in-patch offsets.
    /// Atoms are scored against the residual with their full (unit) norm.
    pub fn restrict(&self, offsets: &[usize]) -> Result<LinearOperator> {
        let d = self.patch_len();
        if let Some(o) = offsets.iter().find(|&&o| o >= d) {
            return Err(Error::InvalidArgument(format!("patch offset {o} >= {d}")));
        }
        let k = self.atom_count();
        let mut data = Vec::with_capacity(offsets.len() * k);
        for atom in self.atoms() {
            data.extend(offsets.iter().map(|&o| atom[o]));
        }
        LinearOperator::from_columns(offsets.len(), k, data)?.with_selection_scale(vec![1.0; k])
    }

    /// Patch synthesized from a sparse code.
    pub fn synthesize(&self, code: &SparseCode) -> Vec<f64> {
        let mut out = vec![0.0; self.patch_len()];
        for (j, c) in code.iter() {
            axpy(c, self.atom(j), &mut out);
        }
        out
    }
}
