//! K-SVD dictionary learning.
//!
//! Each iteration sparse-codes every patch with OMP (in parallel), then
//! sweeps the atoms in index order. For atom `k` the patches that use it form
//! a residual matrix `E_k` with the atom's own contribution added back; the
//! atom and its coefficients are replaced by the leading singular pair of
//! `E_k`, found by power iteration started from the current atom.
//!
//! Training error never increases: a new OMP code only replaces the previous
//! one when it fits the patch at least as well under the current dictionary,
//! a power iteration warm-started at the current atom can only increase
//! `||E_k^T u||`, and unused or duplicated atoms are reseeded only when the
//! re-coded error does not grow.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::patches::PatchSet;
use super::Dictionary;
use crate::error::{Error, Result};
use crate::omp::{axpy, dot, norm, omp};
use crate::par::Exec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsvdParams {
    pub atoms: usize,
    pub sparsity: usize,
    pub iterations: usize,
    pub seed: u64,
    pub exec: Exec,
}

impl Default for KsvdParams {
    fn default() -> Self {
        Self { atoms: 1000, sparsity: 13, iterations: 10, seed: 0, exec: Exec::default() }
    }
}

/// One row of the training log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsvdIteration {
    pub iteration: usize,
    /// Mean over patches of the squared residual norm divided by patch length.
    pub mean_residual: f64,
    pub atoms_replaced: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KsvdReport {
    pub dictionary: Dictionary,
    pub log: Vec<KsvdIteration>,
}

type Code = Vec<(usize, f64)>;

const POWER_MAX_ITERS: usize = 100;
const POWER_TOL: f64 = 1e-13;
/// Atoms with a larger absolute inner product count as duplicates.
const DUPLICATE_COHERENCE: f64 = 0.99;

fn initial_atoms(patches: &[Vec<f64>], k: usize, d: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let usable: Vec<usize> = (0..patches.len()).filter(|&i| norm(&patches[i]) > 0.0).collect();
    let take = k.min(usable.len());
    let mut atoms = Vec::with_capacity(k * d);
    for i in rand::seq::index::sample(rng, usable.len(), take) {
        let p = &patches[usable[i]];
        let n = norm(p);
        atoms.extend(p.iter().map(|v| v / n));
    }
    while atoms.len() < k * d {
        let mut v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n = norm(&v);
        if n > 1e-3 {
            v.iter_mut().for_each(|x| *x /= n);
            atoms.extend(v);
        }
    }
    atoms
}

fn residual_of(x: &[f64], atoms: &[f64], d: usize, code: &Code) -> Vec<f64> {
    let mut r = x.to_vec();
    for &(j, c) in code {
        axpy(-c, &atoms[j * d..(j + 1) * d], &mut r);
    }
    r
}

fn total_error(residuals: &[Vec<f64>]) -> f64 {
    residuals.iter().map(|r| dot(r, r)).sum()
}

/// Re-codes every patch with OMP, keeping the previous code when it fits at
/// least as well under `atoms`.
#[allow(clippy::too_many_arguments)]
fn recode(
    exec: Exec,
    data: &[Vec<f64>],
    atoms: &[f64],
    pr: usize,
    pc: usize,
    sparsity: usize,
    codes: &mut [Code],
    residuals: &mut [Vec<f64>],
) -> Result<()> {
    let d = pr * pc;
    let op = Dictionary { patch_rows: pr, patch_cols: pc, atoms: atoms.to_vec() }.operator();
    let updated: Vec<Result<(Code, Vec<f64>)>> = exec.map_range(data.len(), |i| {
        let x = &data[i];
        let sol = omp(&op, x, sparsity, 1e-12 * norm(x))?;
        let code: Code = sol.code.iter().collect();
        let r = residual_of(x, atoms, d, &code);
        let old_r = residual_of(x, atoms, d, &codes[i]);
        Ok(if dot(&r, &r) <= dot(&old_r, &old_r) { (code, r) } else { (codes[i].clone(), old_r) })
    });
    for (i, res) in updated.into_iter().enumerate() {
        let (code, r) = res?;
        codes[i] = code;
        residuals[i] = r;
    }
    Ok(())
}

/// Replaces unused atoms and atoms nearly parallel to an earlier one with the
/// worst-represented patches. Near-duplicate replacement is kept only when
/// the total error after re-coding does not grow; otherwise only the unused
/// atoms are replaced. Returns the number of atoms replaced.
#[allow(clippy::too_many_arguments)]
fn clear_atoms(
    exec: Exec,
    data: &[Vec<f64>],
    atoms: &mut Vec<f64>,
    pr: usize,
    pc: usize,
    sparsity: usize,
    codes: &mut Vec<Code>,
    residuals: &mut Vec<Vec<f64>>,
) -> Result<usize> {
    let d = pr * pc;
    let k = atoms.len() / d;
    let mut used = vec![false; k];
    for code in codes.iter() {
        for &(j, _) in code {
            used[j] = true;
        }
    }
    let mut duplicate = vec![false; k];
    for j in 0..k {
        if !used[j] {
            continue;
        }
        let aj = &atoms[j * d..(j + 1) * d];
        duplicate[j] = (0..j)
            .any(|i| used[i] && !duplicate[i] && dot(&atoms[i * d..(i + 1) * d], aj).abs() > DUPLICATE_COHERENCE);
    }
    if !duplicate.contains(&true) && used.iter().all(|&u| u) {
        return Ok(0);
    }

    // Worst-represented non-zero patches, worst first (ties to the lower index).
    let mut order: Vec<(usize, f64)> =
        (0..data.len()).filter(|&i| norm(&data[i]) > 0.0).map(|i| (i, dot(&residuals[i], &residuals[i]))).collect();
    order.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let seeds: Vec<usize> = order.iter().filter(|&&(_, e)| e > 0.0).map(|&(i, _)| i).collect();

    let apply = |targets: &[usize], atoms: &mut Vec<f64>, codes: &mut Vec<Code>, residuals: &mut Vec<Vec<f64>>| {
        let replaced: Vec<(usize, usize)> = targets.iter().copied().zip(seeds.iter().copied()).collect();
        let gone: Vec<bool> = (0..k).map(|j| replaced.iter().any(|&(t, _)| t == j)).collect();
        for &(j, p) in &replaced {
            let nx = norm(&data[p]);
            for (a, x) in atoms[j * d..(j + 1) * d].iter_mut().zip(&data[p]) {
                *a = x / nx;
            }
        }
        for (i, code) in codes.iter_mut().enumerate() {
            if code.iter().any(|&(j, _)| gone[j]) {
                code.retain(|&(j, _)| !gone[j]);
                residuals[i] = residual_of(&data[i], atoms, d, code);
            }
        }
        for &(j, p) in &replaced {
            codes[p] = vec![(j, dot(&atoms[j * d..(j + 1) * d], &data[p]))];
            residuals[p] = residual_of(&data[p], atoms, d, &codes[p]);
        }
        replaced.len()
    };

    let unused: Vec<usize> = (0..k).filter(|&j| !used[j]).collect();
    let flagged: Vec<usize> = (0..k).filter(|&j| !used[j] || duplicate[j]).collect();
    if flagged.len() > unused.len() {
        let before = total_error(residuals);
        let (mut t_atoms, mut t_codes, mut t_res) = (atoms.clone(), codes.clone(), residuals.clone());
        let count = apply(&flagged, &mut t_atoms, &mut t_codes, &mut t_res);
        recode(exec, data, &t_atoms, pr, pc, sparsity, &mut t_codes, &mut t_res)?;
        if total_error(&t_res) <= before {
            *atoms = t_atoms;
            *codes = t_codes;
            *residuals = t_res;
            return Ok(count);
        }
    }
    Ok(apply(&unused, atoms, codes, residuals))
}

/// Learns a `K`-atom dictionary from training patches.
pub fn ksvd_train(patches: &PatchSet, params: &KsvdParams) -> Result<KsvdReport> {
    let (pr, pc) = (patches.patch_rows, patches.patch_cols);
    let d = pr * pc;
    let n = patches.len();
    if n == 0 {
        return Err(Error::Empty("training patches"));
    }
    if params.atoms == 0 {
        return Err(Error::InvalidArgument("K must be at least 1".into()));
    }
    if params.sparsity == 0 || params.sparsity > d {
        return Err(Error::InvalidArgument(format!(
            "sparsity {} outside [1, {d}]",
            params.sparsity
        )));
    }
    let data = &patches.patches;
    if data.iter().any(|p| p.len() != d) {
        return Err(Error::DimensionMismatch("patch length differs from patch shape".into()));
    }
    if data.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("training patches"));
    }

    let k = params.atoms;
    let sparsity = params.sparsity.min(k);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut atoms = initial_atoms(data, k, d, &mut rng);
    let mut codes: Vec<Code> = vec![Vec::new(); n];
    let mut residuals: Vec<Vec<f64>> = data.clone();
    let mut log = Vec::with_capacity(params.iterations);

    for iteration in 1..=params.iterations {
        recode(params.exec, data, &atoms, pr, pc, sparsity, &mut codes, &mut residuals)?;

        // Users of every atom, in patch order.
        let mut users: Vec<Vec<(usize, usize)>> = vec![Vec::new(); k];
        for (i, code) in codes.iter().enumerate() {
            for (slot, &(j, _)) in code.iter().enumerate() {
                users[j].push((i, slot));
            }
        }

        for (j, atom_users) in users.iter().enumerate() {
            if atom_users.is_empty() {
                continue;
            }
            let atom = &mut atoms[j * d..(j + 1) * d];
            // E_k columns: residual plus this atom's contribution.
            let e_cols: Vec<Vec<f64>> = atom_users
                .iter()
                .map(|&(i, slot)| {
                    let mut e = residuals[i].clone();
                    axpy(codes[i][slot].1, atom, &mut e);
                    e
                })
                .collect();

            let mut u = atom.to_vec();
            let mut sigma_sq = e_cols.iter().map(|e| dot(&u, e).powi(2)).sum::<f64>();
            for _ in 0..POWER_MAX_ITERS {
                let mut next = vec![0.0; d];
                for e in &e_cols {
                    axpy(dot(&u, e), e, &mut next);
                }
                let nn = norm(&next);
                if nn == 0.0 {
                    break;
                }
                next.iter_mut().for_each(|v| *v /= nn);
                let s = e_cols.iter().map(|e| dot(&next, e).powi(2)).sum::<f64>();
                if s < sigma_sq {
                    break;
                }
                let done = s - sigma_sq <= POWER_TOL * s.max(f64::MIN_POSITIVE);
                u = next;
                sigma_sq = s;
                if done {
                    break;
                }
            }
            atom.copy_from_slice(&u);
            for (&(i, slot), e) in atom_users.iter().zip(e_cols) {
                let coeff = dot(&u, &e);
                codes[i][slot].1 = coeff;
                let mut r = e;
                axpy(-coeff, &u, &mut r);
                residuals[i] = r;
            }
        }

        let replaced = clear_atoms(params.exec, data, &mut atoms, pr, pc, sparsity, &mut codes, &mut residuals)?;
        let mean_residual = total_error(&residuals) / (n * d) as f64;
        log.push(KsvdIteration { iteration, mean_residual, atoms_replaced: replaced });
    }

    // Renormalize to wash out drift from repeated power-iteration updates.
    for atom in atoms.chunks_exact_mut(d) {
        let nrm = norm(atom);
        atom.iter_mut().for_each(|v| *v /= nrm);
    }
    Ok(KsvdReport { dictionary: Dictionary::new(pr, pc, atoms)?, log })
}
