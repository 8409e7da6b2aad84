//! Restricted closed-shell Hartree-Fock.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::integrals::AoIntegrals;
use super::molecule::MoleculeSpec;
use crate::error::{Error, Result};

/// Orbital energies closer than this are treated as one degenerate block.
const DEGENERACY_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScfConfig {
    pub max_iter: usize,
    /// Convergence threshold on max |D_new - D_old|.
    pub density_tol: f64,
    pub damping: f64,
    pub damping_iters: usize,
}

impl Default for ScfConfig {
    fn default() -> Self {
        ScfConfig { max_iter: 200, density_tol: 1e-10, damping: 0.5, damping_iters: 5 }
    }
}

#[derive(Clone, Debug)]
pub struct ScfResult {
    pub hf_energy: f64,
    /// AO -> MO coefficients, columns ordered by ascending orbital energy.
    pub orbital_coefficients: DMatrix<f64>,
    pub orbital_energies: DVector<f64>,
    pub nuclear_repulsion: f64,
    pub converged: bool,
    pub iterations: usize,
}

pub fn rhf(mol: &MoleculeSpec, ints: &AoIntegrals) -> Result<ScfResult> {
    rhf_with(mol, ints, &ScfConfig::default())
}

pub fn rhf_with(mol: &MoleculeSpec, ints: &AoIntegrals, cfg: &ScfConfig) -> Result<ScfResult> {
    let n_electrons = mol.n_electrons()?;
    if n_electrons % 2 != 0 {
        return Err(Error::Unsupported(format!(
            "{n_electrons} electrons: restricted closed-shell HF needs an even count; \
             supply open-shell systems as Hamiltonian files"
        )));
    }
    let n_occ = n_electrons / 2;
    let n = ints.n_basis();
    if n_occ > n {
        return Err(Error::Validation(format!(
            "{n_electrons} electrons do not fit in {n} spatial orbitals"
        )));
    }
    let nuclear_repulsion = mol.nuclear_repulsion()?;
    let hcore = ints.core_hamiltonian();
    let x = inverse_sqrt(&ints.overlap)?;

    let (_, guess) = solve_roothaan(&hcore, &x);
    let mut density = density_matrix(&guess, n_occ);
    for iter in 1..=cfg.max_iter {
        let fock = fock_matrix(&hcore, &ints.eri, &density);
        let (_, coeffs) = solve_roothaan(&fock, &x);
        let fresh = density_matrix(&coeffs, n_occ);
        let change = (&fresh - &density).amax();
        density = if iter <= cfg.damping_iters {
            fresh * (1.0 - cfg.damping) + &density * cfg.damping
        } else {
            fresh
        };
        if change < cfg.density_tol {
            let fock = fock_matrix(&hcore, &ints.eri, &density);
            let (energies, coeffs) = solve_roothaan(&fock, &x);
            let electronic = 0.5 * density.component_mul(&(&hcore + &fock)).sum();
            return Ok(ScfResult {
                hf_energy: electronic + nuclear_repulsion,
                orbital_coefficients: coeffs,
                orbital_energies: energies,
                nuclear_repulsion,
                converged: true,
                iterations: iter,
            });
        }
    }
    Err(Error::Convergence(format!(
        "SCF did not converge in {} iterations",
        cfg.max_iter
    )))
}

fn inverse_sqrt(s: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = SymmetricEigen::new(s.clone());
    if eig.eigenvalues.iter().any(|&w| w <= 1e-10) {
        return Err(Error::Validation("overlap matrix is (near-)singular".into()));
    }
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|w| 1.0 / w.sqrt()));
    Ok(&eig.eigenvectors * d * eig.eigenvectors.transpose())
}

/// `D = 2 C_occ C_occ^T`.
fn density_matrix(c: &DMatrix<f64>, n_occ: usize) -> DMatrix<f64> {
    let occ = c.columns(0, n_occ);
    &occ * occ.transpose() * 2.0
}

fn fock_matrix(
    hcore: &DMatrix<f64>,
    eri: &super::integrals::TwoElectronIntegrals,
    density: &DMatrix<f64>,
) -> DMatrix<f64> {
    let n = hcore.nrows();
    let mut f = hcore.clone();
    for i in 0..n {
        for j in 0..n {
            let mut g = 0.0;
            for k in 0..n {
                for l in 0..n {
                    g += density[(k, l)] * (eri.get(i, j, k, l) - 0.5 * eri.get(i, k, j, l));
                }
            }
            f[(i, j)] += g;
        }
    }
    f
}

/// Solves `F C = S C e` through the orthogonalizer `x = S^{-1/2}` and
/// returns canonicalized MOs sorted by energy.
fn solve_roothaan(fock: &DMatrix<f64>, x: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let fp = x.transpose() * fock * x;
    let eig = SymmetricEigen::new(fp);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let energies = DVector::from_iterator(order.len(), order.iter().map(|&k| eig.eigenvalues[k]));
    let mut cp = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    canonicalize_orbitals(&mut cp, energies.as_slice());
    (energies, x * cp)
}

/// Fixes the arbitrary sign and, within degenerate blocks, the arbitrary
/// rotation of orthonormal MO columns: each block is re-spanned by
/// Gram-Schmidt over the block projections of the unit vectors e_0, e_1, ...
/// so the result varies smoothly with geometry.
pub(crate) fn canonicalize_orbitals(c: &mut DMatrix<f64>, energies: &[f64]) {
    let n = c.nrows();
    let mut start = 0;
    while start < c.ncols() {
        let mut end = start + 1;
        while end < c.ncols() && (energies[end] - energies[end - 1]).abs() < DEGENERACY_TOL {
            end += 1;
        }
        let block = c.columns(start, end - start).into_owned();
        let projector = &block * block.transpose();
        let mut basis: Vec<DVector<f64>> = Vec::with_capacity(end - start);
        for row in 0..n {
            if basis.len() == end - start {
                break;
            }
            let mut v = projector.column(row).into_owned();
            for q in &basis {
                let overlap = q.dot(&v);
                v -= q * overlap;
            }
            let norm = v.norm();
            if norm > 1e-6 {
                basis.push(v / norm);
            }
        }
        for (k, v) in basis.into_iter().enumerate() {
            c.set_column(start + k, &v);
        }
        start = end;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::integrals::sto3g_integrals;
    use crate::chem::molecule::HamiltonianFamily;

    #[test]
    fn rejects_odd_electron_count() {
        let mol = HamiltonianFamily::h3_linear().molecule(1.0).unwrap();
        let ints = sto3g_integrals(&mol).unwrap();
        assert!(matches!(rhf(&mol, &ints), Err(Error::Unsupported(_))));
    }

    #[test]
    fn mo_coefficients_are_s_orthonormal() {
        let mol = HamiltonianFamily::h3_triangle_plus().molecule(1.0).unwrap();
        let ints = sto3g_integrals(&mol).unwrap();
        let scf = rhf(&mol, &ints).unwrap();
        let c = &scf.orbital_coefficients;
        let m = c.transpose() * &ints.overlap * c;
        assert!((m - DMatrix::<f64>::identity(3, 3)).amax() < 1e-8);
        assert!(scf.converged && scf.iterations < 200);
    }

    #[test]
    fn non_convergence_is_reported() {
        let mol = HamiltonianFamily::h2().molecule(0.74).unwrap();
        let ints = sto3g_integrals(&mol).unwrap();
        let cfg = ScfConfig { max_iter: 1, density_tol: 0.0, ..ScfConfig::default() };
        assert!(matches!(rhf_with(&mol, &ints, &cfg), Err(Error::Convergence(_))));
    }

    #[test]
    fn canonical_degenerate_block_is_deterministic() {
        // two different rotations of the same degenerate plane
        let s = 0.5f64.sqrt();
        let mut a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let mut b = DMatrix::from_row_slice(2, 2, &[s, -s, s, s]);
        canonicalize_orbitals(&mut a, &[0.3, 0.3]);
        canonicalize_orbitals(&mut b, &[0.3, 0.3]);
        assert!((a - b).amax() < 1e-12);
    }
}
